#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "umbel/search.hpp"

using namespace umbel;

namespace {

std::size_t last_two(const TreeVertex& x) {
  if (x.size() < 2) return 0;
  return 2 * (x[x.size() - 2] == 1) + (x.back() == 1);
}

FiniteMatrix planar_target(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::array<double, 2>> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  return make_finite_matrix(rows);
}

// Depth-first enumeration over all assignments through the TreeMap interface.
double second_enumeration(const SearchProblem& pr) {
  auto tree = std::make_shared<const Tree>(pr.spec);
  auto space = MetricSpace::finite(pr.target);
  std::vector<std::size_t> a(tree->size());
  double best = -kInf;
  std::function<void(std::size_t)> rec = [&](std::size_t v) {
    if (v == tree->size()) {
      std::vector<Point> pts;
      for (auto x : a) pts.push_back({static_cast<double>(x)});
      TreeMap f(tree, space, pts);
      double r = rhs(pr.invariant, f, pr.p, pr.options);
      if (r > 0) best = std::max(best, lhs(pr.invariant, f, pr.p, pr.options) / r);
      return;
    }
    Pin pin = pr.pins.empty() ? Pin{} : pr.pins[v];
    if (pin.kind == PinKind::Fixed) {
      a[v] = pin.point;
      rec(v + 1);
    } else if (pin.kind == PinKind::FollowParent) {
      a[v] = a[tree->parent(v)];
      rec(v + 1);
    } else {
      for (std::size_t x = 0; x < pr.target.n; ++x) {
        a[v] = x;
        rec(v + 1);
      }
    }
  };
  rec(0);
  return best;
}

// Markov functional on bin(2) with the root pinned to point 0.
SearchProblem markov_instance(std::size_t n, std::uint64_t seed) {
  SearchProblem pr;
  pr.spec = TreeSpec::binary(2);
  pr.target = planar_target(n, seed);
  pr.invariant = InvariantId::MarkovDirected;
  pr.p = 2;
  pr.pins.assign(7, Pin{});
  pr.pins[0] = Pin{PinKind::Fixed, 0};
  return pr;
}

// Fork cotype on bin(4) where only the subtree below (-1,-1) is free. The rest is pinned to the
// code of its last two labels, which separates every pair at height L+2 branching at L.
SearchProblem fork_instance(std::size_t n, std::uint64_t seed) {
  SearchProblem pr;
  pr.spec = TreeSpec::binary(4);
  pr.target = planar_target(n, seed);
  pr.invariant = InvariantId::ForkCotype;
  pr.p = 1;
  Tree t(pr.spec);
  pr.pins.resize(t.size());
  for (std::size_t v = 0; v < t.size(); ++v) {
    const auto& x = t.vertex(v);
    bool below = x.size() >= 2 && x[0] == -1 && x[1] == -1;
    pr.pins[v] = below ? Pin{} : Pin{PinKind::Fixed, last_two(x)};
  }
  return pr;
}

}  // namespace

TEST_CASE("canonical assignment") {
  SearchProblem pr;
  pr.spec = TreeSpec::binary(2);
  pr.target = planar_target(3, 1);
  pr.invariant = InvariantId::MarkovDirected;
  auto a = canonical_assignment(pr);
  // vertex order: (), (-1), (1), (-1,-1), (-1,1), (1,-1), (1,1)
  CHECK(a == std::vector<std::size_t>{0, 0, 1, 0, 1, 1, 2});
  pr.pins = pins_up_to_height(pr.spec, 1);
  CHECK(canonical_assignment(pr) == std::vector<std::size_t>{0, 0, 1, 0, 0, 1, 1});
  pr.pins[0] = Pin{PinKind::Fixed, 2};
  CHECK(canonical_assignment(pr)[0] == 2);
}

TEST_CASE("validation") {
  SearchProblem pr;
  pr.spec = TreeSpec::binary(4);
  pr.target = planar_target(3, 1);
  CHECK_NOTHROW(pr.validate());
  pr.pins.assign(3, Pin{});
  CHECK_THROWS_AS(pr.validate(), Error);
  pr.pins = pins_up_to_height(pr.spec, 4);
  pr.pins[0].kind = PinKind::FollowParent;
  CHECK_THROWS_AS(pr.validate(), Error);
  pr.pins[0] = Pin{PinKind::Fixed, 3};
  CHECK_THROWS_AS(pr.validate(), Error);
  pr.pins.clear();
  pr.spec = TreeSpec::binary(3);
  CHECK_THROWS_AS(pr.validate(), Error);
  pr.spec = TreeSpec::binary(4);
  pr.p = 0;
  CHECK_THROWS_AS(pr.validate(), Error);
}

TEST_CASE("exhaustive search agrees with a second enumeration") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto m = markov_instance(4, seed);
    auto r = exhaustive_max(m);
    CHECK(r.evaluated == 4096);
    CHECK(r.ratio == second_enumeration(m));
    Tree t(m.spec);
    CHECK(*assignment_ratio(m, t, r.assignment) == r.ratio);
    CHECK(r.assignment[0] == 0);

    auto f = fork_instance(4, seed);
    auto rf = exhaustive_max(f);
    CHECK(rf.evaluated == 16384);
    CHECK(rf.ratio == second_enumeration(f));
    CHECK(rf.ratio > 0);
  }
}

TEST_CASE("vanishing right side everywhere") {
  SearchProblem pr;
  pr.spec = TreeSpec::binary(2);
  pr.target = planar_target(3, 2);
  pr.invariant = InvariantId::MarkovDirected;
  pr.pins.assign(7, Pin{PinKind::FollowParent, 0});
  pr.pins[0] = Pin{};
  try {
    exhaustive_max(pr);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoFeasible);
  }
  try {
    local_search_max(pr, 3, 5, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoFeasible);
  }
}

TEST_CASE("budget") {
  auto pr = markov_instance(4, 1);
  try {
    exhaustive_max(pr, 100);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Budget);
  }
  SearchProblem big;
  big.spec = TreeSpec::binary(8);
  big.target = planar_target(5, 1);
  CHECK_THROWS_AS(exhaustive_max(big), Error);
}

TEST_CASE("local search") {
  int hits = 0;
  auto pr = markov_instance(4, 7);
  double best = exhaustive_max(pr).ratio;
  double canon = *assignment_ratio(pr, Tree(pr.spec), canonical_assignment(pr));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = local_search_max(pr, 8, 100, seed);
    CHECK(r.ratio <= best);
    CHECK(r.ratio >= canon);
    if (std::abs(r.ratio - best) <= 1e-12 * best) ++hits;
  }
  CHECK(hits >= 9);

  auto still = local_search_max(pr, 0, 0, 3);
  CHECK(still.ratio == canon);
  CHECK(still.assignment == canonical_assignment(pr));
  CHECK(still.evaluated == 1);
}

TEST_CASE("results do not depend on the thread count") {
  auto pr = fork_instance(4, 4);
  auto a = exhaustive_max(pr);
  auto la = local_search_max(pr, 5, 20, 9);
  set_thread_count(1);
  auto b = exhaustive_max(pr);
  auto lb = local_search_max(pr, 5, 20, 9);
  set_thread_count(0);
  CHECK(a.ratio == b.ratio);
  CHECK(a.assignment == b.assignment);
  CHECK(la.ratio == lb.ratio);
  CHECK(la.assignment == lb.assignment);
  CHECK(la.evaluated == lb.evaluated);
}

TEST_CASE("relabelling the target leaves the maximum unchanged") {
  SearchProblem pr;
  pr.spec = TreeSpec::binary(2);
  pr.target = planar_target(3, 5);
  pr.invariant = InvariantId::MarkovDirected;
  pr.p = 1;
  double base = exhaustive_max(pr).ratio;
  std::vector<std::size_t> perm{2, 0, 1};
  FiniteMatrix q = pr.target;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) q.d[perm[i] * 3 + perm[j]] = pr.target.at(i, j);
  pr.target = q;
  CHECK(exhaustive_max(pr).ratio == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("identity report") {
  auto r = identity_report(TreeSpec::binary(4), InvariantId::ForkCotype, 1);
  CHECK(r.lhs == doctest::Approx(2.0));
  CHECK(r.rhs == doctest::Approx(1.0));
}
