#include "umbel/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace umbel {

namespace {

const std::vector<std::pair<InvariantId, std::string>>& invariant_names() {
  static const std::vector<std::pair<InvariantId, std::string>> names = {
      {InvariantId::UmbelConvexity, "umbel-convexity"}, {InvariantId::RelaxedUmbel, "relaxed-umbel"},
      {InvariantId::UmbelCotype, "umbel-cotype"},       {InvariantId::ForkConvexity, "fork-convexity"},
      {InvariantId::ForkCotype, "fork-cotype"},         {InvariantId::MarkovDirected, "markov"},
      {InvariantId::Tessera, "tessera"},
  };
  return names;
}

const char* kChainConvention =
    "directed walk: root for t<=0, uniform child each step, absorbed at leaves; s in [0,k], t in [1,2^k]";

double pow2(int e) { return std::ldexp(1.0, e); }

// Sums values in index order so the result does not depend on scheduling.
double ordered_sum(const std::vector<double>& v) {
  double acc = 0;
  for (double x : v) acc += x;
  return acc;
}

template <class Fn>
std::vector<double> eval_terms(std::size_t n, Fn&& fn) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

// Average of d^q over all pairs of descendants at height H of vertices a and b.
double pair_average(const Tree& tree, const VertexDistance& d, double q, std::size_t a, std::size_t b, int H) {
  auto [a0, a1] = tree.descendants(a, H);
  auto [b0, b1] = tree.descendants(b, H);
  double acc = 0;
  for (auto u = a0; u < a1; ++u)
    for (auto v = b0; v < b1; ++v) acc += std::pow(d(u, v), q);
  return acc / static_cast<double>((a1 - a0) * (b1 - b0));
}

// E[d^q] for two walks that share their first tau steps and then take m independent steps.
double coupled_expectation(const Tree& tree, const VertexDistance& d, int tau, int m, double q) {
  double total = 0;
  for (int l = 1; l <= m; ++l) {
    auto [lo, hi] = tree.level(tau + l - 1);
    double acc = 0;
    for (auto v = lo; v < hi; ++v) {
      const auto& ch = tree.children(v);  // (-1 child, +1 child)
      acc += pair_average(tree, d, q, ch[0], ch[1], tau + m);
    }
    total += std::ldexp(acc / static_cast<double>(hi - lo), -l);
  }
  return total;
}

double level_edge_max(const Tree& tree, const VertexDistance& d, double p, int l) {
  auto [lo, hi] = tree.level(l);
  double m = 0;
  for (auto v = lo; v < hi; ++v) m = std::max(m, d(tree.parent(v), v));
  return std::pow(m, p);
}

double level_edge_mean(const Tree& tree, const VertexDistance& d, double p, int l) {
  auto [lo, hi] = tree.level(l);
  double acc = 0;
  for (auto v = lo; v < hi; ++v) acc += std::pow(d(tree.parent(v), v), p);
  return acc / static_cast<double>(hi - lo);
}

int log2_exact(int h) {
  int k = 0;
  while ((1 << k) < h) ++k;
  return (1 << k) == h ? k : -1;
}

}  // namespace

std::string to_string(InvariantId id) {
  for (const auto& [i, n] : invariant_names())
    if (i == id) return n;
  return "unknown";
}

InvariantId parse_invariant(const std::string& name) {
  for (const auto& [i, n] : invariant_names())
    if (n == name) return i;
  if (name == "markov-directed") return InvariantId::MarkovDirected;
  fail("unknown invariant: " + name);
}

bool needs_increasing(InvariantId id) {
  return id == InvariantId::UmbelConvexity || id == InvariantId::RelaxedUmbel || id == InvariantId::UmbelCotype;
}

TreeMap::TreeMap(std::shared_ptr<const Tree> tree, MetricSpace target, std::vector<Point> assignment)
    : tree_(std::move(tree)), target_(std::move(target)), points_(std::move(assignment)) {
  require(tree_ != nullptr, "tree map needs a tree");
  require(points_.size() == tree_->size(), "assignment must cover every vertex");
  for (const auto& pt : points_) target_.check_point(pt);
}

TreeMap TreeMap::identity(const TreeSpec& spec) {
  auto tree = std::make_shared<const Tree>(spec);
  std::vector<Point> pts(tree->size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {static_cast<double>(i)};
  return TreeMap(tree, MetricSpace::tree(tree), std::move(pts));
}

TreeMap TreeMap::constant(const TreeSpec& spec) {
  auto tree = std::make_shared<const Tree>(spec);
  std::vector<Point> pts(tree->size(), Point{0.0});
  return TreeMap(tree, MetricSpace::tree(tree), std::move(pts));
}

int invariant_depth(InvariantId inv, const TreeSpec& spec) {
  bool inc = spec.kind == TreeKind::Increasing;
  require(inc == needs_increasing(inv), to_string(inv) + " needs " + (needs_increasing(inv) ? "an increasing" : "a binary") +
                                            " tree");
  int k = log2_exact(spec.height);
  require(k >= 0, "tree height must be a power of two");
  require(k >= (inv == InvariantId::MarkovDirected ? 1 : 2),
          to_string(inv) + " needs height 2^k with k >= " + (inv == InvariantId::MarkovDirected ? "1" : "2"));
  if (inc) require(spec.branching >= (1 << k) + 1, "branching must be at least 2^k + 1");
  return k;
}

double min_branch_pair(const Tree& tree, const VertexDistance& d, double p, int H, int L, int j_min) {
  require(0 <= L && L < H && H <= tree.spec().height, "bad branch heights");
  bool binary = tree.spec().kind == TreeKind::Binary;
  auto [lo, hi] = tree.level(L);
  double best = kInf;
  for (auto a = lo; a < hi; ++a) {
    const auto& ch = tree.children(a);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      auto [u0, u1] = tree.descendants(ch[i], H);
      if (u0 == u1) continue;
      for (std::size_t j = i + 1; j < ch.size(); ++j) {
        if (!binary && tree.vertex(ch[j]).back() < j_min) continue;
        auto [v0, v1] = tree.descendants(ch[j], H);
        for (auto u = u0; u < u1; ++u)
          for (auto v = v0; v < v1; ++v) best = std::min(best, d(u, v));
      }
    }
  }
  return best == kInf ? kInf : std::pow(best, p);
}

double lhs(InvariantId inv, const Tree& tree, const VertexDistance& d, double p, const InvariantOptions& opt) {
  require(p > 0, "exponent must be positive");
  const int k = invariant_depth(inv, tree.spec());
  const int top = 1 << k;
  struct Term {
    int s, t;
  };
  std::vector<Term> terms;
  switch (inv) {
    case InvariantId::UmbelCotype:
    case InvariantId::RelaxedUmbel:
    case InvariantId::ForkCotype:
      for (int s = 1; s <= k - 1; ++s) terms.push_back({s, 0});
      break;
    case InvariantId::UmbelConvexity:
    case InvariantId::ForkConvexity:
      for (int s = 1; s <= k - 1; ++s)
        for (int t = 1; t <= (1 << (k - 1 - s)); ++t) terms.push_back({s, t});
      break;
    case InvariantId::Tessera:
      for (int s = 0; s <= k - 1; ++s)
        if ((1 << s) + 1 <= top - (1 << s)) terms.push_back({s, 0});
      break;
    case InvariantId::MarkovDirected:
      for (int s = 0; s <= k; ++s)
        for (int t = 1; t <= top; ++t) terms.push_back({s, t});
      break;
  }
  auto vals = eval_terms(terms.size(), [&](std::size_t i) -> double {
    const int s = terms[i].s, t = terms[i].t, w = 1 << s;
    const double scale = std::pow(2.0, s * p);
    switch (inv) {
      case InvariantId::UmbelCotype:
        return min_branch_pair(tree, d, p, top, top - w, 0) / scale;
      case InvariantId::RelaxedUmbel:
        return min_branch_pair(tree, d, p, top, top - w, opt.j_min) / scale;
      case InvariantId::ForkCotype: {
        double best = kInf;
        for (int L = 0; L <= top - w; ++L) best = std::min(best, min_branch_pair(tree, d, p, L + w, L));
        return best / scale;
      }
      case InvariantId::UmbelConvexity:
      case InvariantId::ForkConvexity: {
        const int L = t * 2 * w - w;
        return min_branch_pair(tree, d, p, L + w, L, opt.j_min) / scale / pow2(k - 1 - s);
      }
      case InvariantId::Tessera: {
        double best = kInf;
        for (int l = w + 1; l <= top - w; ++l) {
          auto [lo, hi] = tree.level(l);
          double acc = 0;
          for (auto e = lo; e < hi; ++e) acc += pair_average(tree, d, p, e, e, l + w);
          best = std::min(best, acc / static_cast<double>(hi - lo));
        }
        return best / scale;
      }
      case InvariantId::MarkovDirected: {
        const int tau = std::max(t - w, 0);
        return coupled_expectation(tree, d, tau, t - tau, p) / scale;
      }
    }
    return 0.0;
  });
  return ordered_sum(vals);
}

double rhs(InvariantId inv, const Tree& tree, const VertexDistance& d, double p, const InvariantOptions&) {
  require(p > 0, "exponent must be positive");
  const int k = invariant_depth(inv, tree.spec());
  const int top = 1 << k;
  switch (inv) {
    case InvariantId::UmbelConvexity:
    case InvariantId::ForkConvexity: {
      auto v = eval_terms(top, [&](std::size_t i) { return level_edge_max(tree, d, p, static_cast<int>(i) + 1); });
      return ordered_sum(v) / top;
    }
    case InvariantId::MarkovDirected: {
      auto v = eval_terms(top, [&](std::size_t i) { return level_edge_mean(tree, d, p, static_cast<int>(i) + 1); });
      return ordered_sum(v);
    }
    default:
      return std::pow(lipschitz(tree, d).value, p);
  }
}

double lhs(InvariantId inv, const TreeMap& f, double p, const InvariantOptions& opt) {
  return lhs(inv, f.tree(), [&](std::size_t u, std::size_t v) { return f.distance(u, v); }, p, opt);
}

double rhs(InvariantId inv, const TreeMap& f, double p, const InvariantOptions& opt) {
  return rhs(inv, f.tree(), [&](std::size_t u, std::size_t v) { return f.distance(u, v); }, p, opt);
}

LipschitzResult lipschitz(const Tree& tree, const VertexDistance& d) {
  const std::size_t n = tree.size();
  auto rows = eval_terms(n, [&](std::size_t u) {
    double m = 0;
    for (std::size_t v = u + 1; v < n; ++v) m = std::max(m, d(u, v) / tree.distance(u, v));
    return m;
  });
  LipschitzResult r;
  for (double x : rows) r.pair_value = std::max(r.pair_value, x);
  for (std::size_t v = 1; v < n; ++v) r.edge_value = std::max(r.edge_value, d(tree.parent(v), v));
  r.differs = !approx_equal(r.pair_value, r.edge_value);
  r.value = std::max(r.pair_value, r.edge_value);
  return r;
}

double lipschitz_constant(const TreeMap& f) {
  return lipschitz(f.tree(), [&](std::size_t u, std::size_t v) { return f.distance(u, v); }).value;
}

namespace {

int check_markov_args(const Tree& tree, int s, int t) {
  require(tree.spec().kind == TreeKind::Binary, "Markov expectations need a binary tree");
  int k = log2_exact(tree.spec().height);
  require(k >= 0, "tree height must be a power of two");
  require(0 <= s && s <= k, "s out of range");
  require((1 << s) <= t && t <= (1 << k), "t out of range");
  return k;
}

}  // namespace

double markov_pair_expectation_exact(const Tree& tree, const VertexDistance& d, int s, int t, double q,
                                     bool displayed_normalization) {
  check_markov_args(tree, s, t);
  require(q > 0, "exponent must be positive");
  double e = coupled_expectation(tree, d, t - (1 << s), 1 << s, q);
  return displayed_normalization ? 2 * e : e;
}

double markov_pair_expectation_exact(const TreeMap& f, int s, int t, double q, bool displayed_normalization) {
  return markov_pair_expectation_exact(
      f.tree(), [&](std::size_t u, std::size_t v) { return f.distance(u, v); }, s, t, q, displayed_normalization);
}

MonteCarloEstimate markov_pair_expectation_mc(const TreeMap& f, int s, int t, double q, std::size_t n,
                                              std::uint64_t seed) {
  const Tree& tree = f.tree();
  check_markov_args(tree, s, t);
  require(n >= 1, "need at least one path");
  const int tau = t - (1 << s);
  constexpr std::size_t kChunk = 4096;
  std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(seed, c));
    std::bernoulli_distribution coin(0.5);
    std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      std::size_t a = 0;
      for (int step = 0; step < tau; ++step) a = tree.children(a)[coin(rng)];
      std::size_t b = a;
      for (int step = tau; step < t; ++step) {
        a = tree.children(a)[coin(rng)];
        b = tree.children(b)[coin(rng)];
      }
      double x = std::pow(f.distance(a, b), q);
      sums[c] += x;
      squares[c] += x * x;
    }
  });
  double sum = ordered_sum(sums), sq = ordered_sum(squares);
  double nn = static_cast<double>(n);
  MonteCarloEstimate out;
  out.estimate = sum / nn;
  if (n > 1) {
    double var = std::max(0.0, (sq - sum * sum / nn) / (nn - 1));
    out.standard_error = std::sqrt(var / nn);
  }
  return out;
}

double markov_fork_sum(const Tree& tree, const VertexDistance& d, double q) {
  int k = log2_exact(tree.spec().height);
  require(tree.spec().kind == TreeKind::Binary && k >= 1, "needs a binary tree of height 2^k");
  double total = 0;
  for (int s = 1; s <= k - 1; ++s) {
    double acc = 0;
    for (int t = 1 << s; t <= (1 << k); ++t) acc += markov_pair_expectation_exact(tree, d, s, t, q);
    total += acc / pow2(k) / std::pow(2.0, s * q);
  }
  return total;
}

InvariantReport report(InvariantId inv, const Tree& tree, const VertexDistance& d, double p,
                       const InvariantOptions& opt) {
  InvariantReport r;
  r.invariant = inv;
  r.p = p;
  r.k = invariant_depth(inv, tree.spec());
  r.branching = tree.spec().branching;
  r.j_min = opt.j_min;
  if (inv == InvariantId::MarkovDirected) r.chain = kChainConvention;
  r.lhs = lhs(inv, tree, d, p, opt);
  r.rhs = rhs(inv, tree, d, p, opt);
  if (r.rhs > 0) {
    r.ratio = r.lhs / r.rhs;
    r.ratio_root = std::pow(*r.ratio, 1.0 / p);
  } else if (r.lhs > 0) {
    throw std::logic_error("positive left side with vanishing right side");
  }
  return r;
}

InvariantReport report(InvariantId inv, const TreeMap& f, double p, const InvariantOptions& opt) {
  return report(inv, f.tree(), [&](std::size_t u, std::size_t v) { return f.distance(u, v); }, p, opt);
}

}  // namespace umbel
