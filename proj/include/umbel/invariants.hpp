#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "umbel/spaces.hpp"
#include "umbel/trees.hpp"

namespace umbel {

enum class InvariantId { UmbelConvexity, RelaxedUmbel, UmbelCotype, ForkConvexity, ForkCotype, MarkovDirected, Tessera };

std::string to_string(InvariantId id);
InvariantId parse_invariant(const std::string& name);  // "umbel-cotype", "fork-convexity", "markov", ...
bool needs_increasing(InvariantId id);

class TreeMap {
 public:
  TreeMap(std::shared_ptr<const Tree> tree, MetricSpace target, std::vector<Point> assignment);

  // The tree into its own path metric.
  static TreeMap identity(const TreeSpec& spec);
  // Every vertex to the root, in the tree's own path metric.
  static TreeMap constant(const TreeSpec& spec);

  const Tree& tree() const { return *tree_; }
  std::shared_ptr<const Tree> tree_ptr() const { return tree_; }
  const TreeSpec& spec() const { return tree_->spec(); }
  const MetricSpace& target() const { return target_; }
  const std::vector<Point>& assignment() const { return points_; }
  const Point& at(std::size_t v) const { return points_[v]; }
  double distance(std::size_t u, std::size_t v) const { return target_.distance(points_[u], points_[v]); }

 private:
  std::shared_ptr<const Tree> tree_;
  MetricSpace target_;
  std::vector<Point> points_;
};

// Image distance between two vertices, addressed by tree index.
using VertexDistance = std::function<double(std::size_t, std::size_t)>;

struct InvariantOptions {
  // Branch labels j of the second vertex in the relaxed and convexity functionals must be >= j_min.
  int j_min = 0;
};

// k with height = 2^k, after checking the kind, height and branching requirements of `inv`.
int invariant_depth(InvariantId inv, const TreeSpec& spec);

double lhs(InvariantId inv, const Tree& tree, const VertexDistance& d, double p, const InvariantOptions& opt = {});
double rhs(InvariantId inv, const Tree& tree, const VertexDistance& d, double p, const InvariantOptions& opt = {});
double lhs(InvariantId inv, const TreeMap& f, double p, const InvariantOptions& opt = {});
double rhs(InvariantId inv, const TreeMap& f, double p, const InvariantOptions& opt = {});

struct LipschitzResult {
  double value = 0.0;  // the larger of the two
  double pair_value = 0.0;
  double edge_value = 0.0;
  bool differs = false;
};
LipschitzResult lipschitz(const Tree& tree, const VertexDistance& d);
double lipschitz_constant(const TreeMap& f);

// Minimum of d(u,v)^p over u, v at height H whose longest common prefix has length exactly L.
// For increasing trees the branch label of v must exceed that of u and be >= j_min.
double min_branch_pair(const Tree& tree, const VertexDistance& d, double p, int H, int L, int j_min = 0);

// E[d(f(W_t), f(W'_t))^q] for the directed walk W on a binary tree and a copy W' that agrees
// with W up to time t - 2^s and then moves independently. The displayed normalization option
// multiplies each branch term by 2 (the inner factor 2/4^(2^s - l)); the default is the law of
// the walk.
double markov_pair_expectation_exact(const TreeMap& f, int s, int t, double q, bool displayed_normalization = false);
double markov_pair_expectation_exact(const Tree& tree, const VertexDistance& d, int s, int t, double q,
                                     bool displayed_normalization = false);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};
MonteCarloEstimate markov_pair_expectation_mc(const TreeMap& f, int s, int t, double q, std::size_t n,
                                              std::uint64_t seed);

// Sum over s in [1, k-1] of 2^-k sum_{t=2^s}^{2^k} E[...]/2^{sq}, the normalized Markov sum
// bounding the fork cotype terms.
double markov_fork_sum(const Tree& tree, const VertexDistance& d, double q);

struct InvariantReport {
  InvariantId invariant = InvariantId::UmbelCotype;
  double p = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> ratio;       // lhs / rhs
  std::optional<double> ratio_root;  // (lhs / rhs)^(1/p)
  int k = 0;
  int branching = 0;
  int j_min = 0;
  std::string chain;  // walk convention, MarkovDirected only
};

InvariantReport report(InvariantId inv, const TreeMap& f, double p, const InvariantOptions& opt = {});
InvariantReport report(InvariantId inv, const Tree& tree, const VertexDistance& d, double p,
                       const InvariantOptions& opt = {});

}  // namespace umbel
