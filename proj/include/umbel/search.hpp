#pragma once

#include <cstdint>
#include <vector>

#include "umbel/invariants.hpp"

namespace umbel {

enum class PinKind { Free, Fixed, FollowParent };

struct Pin {
  PinKind kind = PinKind::Free;
  std::size_t point = 0;  // Fixed only
};

struct SearchProblem {
  TreeSpec spec;
  FiniteMatrix target;
  InvariantId invariant = InvariantId::ForkCotype;
  double p = 1.0;
  std::vector<Pin> pins;  // one per vertex in enumeration order; empty means all free
  InvariantOptions options;

  void validate() const;
};

// Vertices above free_height follow their parent's image; the rest are free.
std::vector<Pin> pins_up_to_height(const TreeSpec& spec, int free_height);

struct SearchResult {
  std::vector<std::size_t> assignment;  // target index per vertex
  double ratio = 0.0;
  std::size_t evaluated = 0;
};

inline constexpr std::size_t kExhaustiveBudget = 10'000'000;

// lhs/rhs of a full assignment, or nothing when rhs = 0.
std::optional<double> assignment_ratio(const SearchProblem& problem, const Tree& tree,
                                       const std::vector<std::size_t>& assignment);

// Free vertex i takes (parent image + rank among siblings) mod n; the root takes point 0.
std::vector<std::size_t> canonical_assignment(const SearchProblem& problem);

SearchResult exhaustive_max(const SearchProblem& problem, std::size_t budget = kExhaustiveBudget);

// Run 0 starts from the canonical assignment, runs 1..restarts from random assignments; each run
// takes up to `steps` steepest-ascent single-vertex moves.
SearchResult local_search_max(const SearchProblem& problem, std::size_t restarts, std::size_t steps,
                              std::uint64_t seed);

InvariantReport identity_report(const TreeSpec& spec, InvariantId inv, double p);

}  // namespace umbel
