#include "umbel/search.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace umbel {

void SearchProblem::validate() const {
  spec.validate();
  invariant_depth(invariant, spec);
  require(target.n >= 2, "search target needs at least two points");
  require(p > 0, "exponent must be positive");
  std::size_t n = spec.vertex_count();
  require(pins.empty() || pins.size() == n, "pin mask must cover every vertex");
  if (!pins.empty()) {
    require(pins[0].kind != PinKind::FollowParent, "the root has no parent to follow");
    for (const auto& pin : pins)
      require(pin.kind != PinKind::Fixed || pin.point < target.n, "pinned point out of range");
  }
}

std::vector<Pin> pins_up_to_height(const TreeSpec& spec, int free_height) {
  auto verts = vertices(spec);
  std::vector<Pin> pins(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i)
    if (static_cast<int>(verts[i].size()) > free_height) pins[i].kind = PinKind::FollowParent;
  return pins;
}

namespace {

struct Context {
  const SearchProblem& problem;
  Tree tree;
  std::vector<std::size_t> free;  // free vertex indices in enumeration order

  explicit Context(const SearchProblem& pr) : problem(pr), tree(pr.spec) {
    pr.validate();
    for (std::size_t v = 0; v < tree.size(); ++v)
      if (pr.pins.empty() || pr.pins[v].kind == PinKind::Free) free.push_back(v);
  }

  PinKind kind(std::size_t v) const { return problem.pins.empty() ? PinKind::Free : problem.pins[v].kind; }

  // Fills pinned vertices from the free values already stored in a.
  void resolve(std::vector<std::size_t>& a) const {
    for (std::size_t v = 0; v < tree.size(); ++v) {
      if (kind(v) == PinKind::Fixed) a[v] = problem.pins[v].point;
      if (kind(v) == PinKind::FollowParent) a[v] = a[tree.parent(v)];
    }
  }

  double score(const std::vector<std::size_t>& a) const {
    auto r = assignment_ratio(problem, tree, a);
    return r ? *r : -kInf;
  }
};

bool better(double r, const std::vector<std::size_t>& a, double best, const std::vector<std::size_t>& b) {
  if (r != best) return r > best;
  return a < b;
}

}  // namespace

std::optional<double> assignment_ratio(const SearchProblem& problem, const Tree& tree,
                                       const std::vector<std::size_t>& a) {
  const auto& m = problem.target;
  VertexDistance d = [&](std::size_t u, std::size_t v) { return m.at(a[u], a[v]); };
  double r = rhs(problem.invariant, tree, d, problem.p, problem.options);
  if (!(r > 0)) return std::nullopt;
  return lhs(problem.invariant, tree, d, problem.p, problem.options) / r;
}

std::vector<std::size_t> canonical_assignment(const SearchProblem& problem) {
  Context ctx(problem);
  std::vector<std::size_t> a(ctx.tree.size(), 0);
  // parents precede children in enumeration order, so one pass suffices
  for (std::size_t v = 0; v < ctx.tree.size(); ++v) {
    switch (ctx.kind(v)) {
      case PinKind::Fixed: a[v] = problem.pins[v].point; break;
      case PinKind::FollowParent: a[v] = a[ctx.tree.parent(v)]; break;
      case PinKind::Free:
        if (v == 0) break;
        const auto& sib = ctx.tree.children(ctx.tree.parent(v));
        auto rank = static_cast<std::size_t>(std::find(sib.begin(), sib.end(), v) - sib.begin());
        a[v] = (a[ctx.tree.parent(v)] + rank) % problem.target.n;
        break;
    }
  }
  return a;
}

SearchResult exhaustive_max(const SearchProblem& problem, std::size_t budget) {
  Context ctx(problem);
  const std::size_t n = problem.target.n;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ctx.free.size(); ++i) {
    if (total > budget / n) throw Error(ErrorCode::Budget, "assignment count exceeds the search budget");
    total *= n;
  }
  if (total > budget) throw Error(ErrorCode::Budget, "assignment count exceeds the search budget");

  constexpr std::size_t kChunk = 1024;
  std::size_t chunks = (total + kChunk - 1) / kChunk;
  struct Best {
    double ratio = -kInf;
    std::vector<std::size_t> a;
  };
  std::vector<Best> bests(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<std::size_t> a(ctx.tree.size(), 0);
    auto& best = bests[c];
    std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t idx = c * kChunk; idx < end; ++idx) {
      // first free vertex is the most significant digit
      std::size_t rest = idx;
      for (std::size_t i = ctx.free.size(); i-- > 0;) {
        a[ctx.free[i]] = rest % n;
        rest /= n;
      }
      ctx.resolve(a);
      double r = ctx.score(a);
      if (r > best.ratio) {
        best.ratio = r;
        best.a = a;
      }
    }
  });
  SearchResult out;
  out.ratio = -kInf;
  out.evaluated = total;
  for (auto& b : bests)
    if (b.ratio > out.ratio) {
      out.ratio = b.ratio;
      out.assignment = std::move(b.a);
    }
  if (out.ratio == -kInf) throw Error(ErrorCode::NoFeasible, "every assignment has a vanishing right side");
  return out;
}

SearchResult local_search_max(const SearchProblem& problem, std::size_t restarts, std::size_t steps,
                              std::uint64_t seed) {
  Context ctx(problem);
  const std::size_t n = problem.target.n;
  auto start = canonical_assignment(problem);
  struct Run {
    double ratio = -kInf;
    std::vector<std::size_t> a;
    std::size_t evaluated = 0;
  };
  std::vector<Run> runs(restarts + 1);
  parallel_for(runs.size(), [&](std::size_t r) {
    std::vector<std::size_t> a = start;
    if (r > 0) {
      std::mt19937_64 rng(derive_seed(seed, r));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto v : ctx.free) a[v] = pick(rng);
      ctx.resolve(a);
    }
    double cur = ctx.score(a);
    std::size_t evals = 1;
    for (std::size_t step = 0; step < steps; ++step) {
      double best = cur;
      std::vector<std::size_t> best_a;
      for (auto v : ctx.free) {
        for (std::size_t x = 0; x < n; ++x) {
          if (x == a[v]) continue;
          auto b = a;
          b[v] = x;
          ctx.resolve(b);
          double s = ctx.score(b);
          ++evals;
          if (s > best) {
            best = s;
            best_a = std::move(b);
          }
        }
      }
      if (best_a.empty()) break;
      a = std::move(best_a);
      cur = best;
    }
    runs[r] = Run{cur, std::move(a), evals};
  });
  SearchResult out;
  out.ratio = -kInf;
  for (auto& run : runs) {
    out.evaluated += run.evaluated;
    if (out.assignment.empty() || better(run.ratio, run.a, out.ratio, out.assignment)) {
      out.ratio = run.ratio;
      out.assignment = run.a;
    }
  }
  if (out.ratio == -kInf) throw Error(ErrorCode::NoFeasible, "no visited assignment has a positive right side");
  return out;
}

InvariantReport identity_report(const TreeSpec& spec, InvariantId inv, double p) {
  return report(inv, TreeMap::identity(spec), p);
}

}  // namespace umbel
