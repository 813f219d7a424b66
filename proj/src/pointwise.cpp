#include "umbel/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace umbel {

namespace {

const std::vector<std::pair<InequalityId, std::vector<std::string>>>& inequality_names() {
  static const std::vector<std::pair<InequalityId, std::vector<std::string>>> names = {
      {InequalityId::PUmbel, {"p-umbel", "pumbel"}},
      {InequalityId::RelaxedPUmbel, {"relaxed-p-umbel", "relaxed-pumbel"}},
      {InequalityId::SuperRelaxedPUmbel, {"superrelaxed-p-umbel", "superrelaxed-pumbel"}},
      {InequalityId::QTripod, {"q-tripod", "tripod"}},
      {InequalityId::QFork, {"q-fork", "fork"}},
      {InequalityId::RelaxedQFork, {"relaxed-q-fork", "relaxed-fork"}},
      {InequalityId::PUniformConvexity, {"p-uniform-convexity", "uniform-convexity"}},
      {InequalityId::MidpointCurvature, {"midpoint-curvature", "midpoint"}},
      {InequalityId::HeisenbergParallelogram, {"heisenberg-parallelogram", "parallelogram"}},
  };
  return names;
}

double powp(double d, double p) { return std::pow(d, p); }

std::size_t arity(InequalityId id) {
  switch (id) {
    case InequalityId::PUniformConvexity:
    case InequalityId::HeisenbergParallelogram:
      return 2;
    case InequalityId::QTripod:
    case InequalityId::QFork:
    case InequalityId::RelaxedQFork:
    case InequalityId::MidpointCurvature:
      return 4;
    default:
      return 0;
  }
}

CheckReport finish(double lhs, double rhs, double slack, PointTuple witness) {
  CheckReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.holds = r.margin >= -slack;
  r.witness = std::move(witness);
  return r;
}

}  // namespace

std::string to_string(InequalityId id) {
  for (const auto& [i, names] : inequality_names())
    if (i == id) return names.front();
  return "unknown";
}

InequalityId parse_inequality(const std::string& name) {
  for (const auto& [i, names] : inequality_names())
    for (const auto& n : names)
      if (n == name) return i;
  fail("unknown inequality: " + name);
}

bool is_umbel_family(InequalityId id) {
  return id == InequalityId::PUmbel || id == InequalityId::RelaxedPUmbel || id == InequalityId::SuperRelaxedPUmbel;
}

ParallelogramConstants parallelogram_constants(double p, double C) {
  require(p >= 2, "parallelogram inequality needs p >= 2");
  require(C > 0, "convexity constant must be positive");
  double K = std::max(C, std::pow(std::pow(3.0, 2 * p - 1) * 6.0 / std::pow(4.0, p), 1.0 / (2 * p)));
  double lambda = std::pow(1.0 / 3.0 + 1.0 / (std::pow(3.0, p) * 6.0), -1.0) * std::pow(2.0, 1 - p) / std::pow(C, p);
  return {K, lambda};
}

CheckReport check_parallelogram(const HeisenbergSpace& sp, double p, double C, const HPoint& a, const HPoint& b,
                                double slack) {
  require(p >= 2, "parallelogram inequality needs p >= 2");
  require(sp.omega_norm <= 1.0 + kRelTol, "form operator norm exceeds 1; rescale the form");
  auto [K, lambda] = parallelogram_constants(p, C);
  auto N = [&](const HPoint& g) { return std::pow(koranyi_norm(sp, g, p, lambda), 2 * p); };
  HPoint half_b = h_dilate(0.5, b);
  double lhs = 0.5 * N(a) + 0.5 * N(h_mul(sp, h_inv(b), a));
  double rhs = N(half_b) + std::pow(K, -2 * p) * N(h_mul(sp, h_inv(half_b), a));
  // The inequality reads lhs >= rhs, so the report lists them the other way round.
  return finish(rhs, lhs, slack, {to_point(a), to_point(b)});
}

CheckReport check_inequality(InequalityId id, const InequalityConfig& cfg, const PointTuple& pts,
                             const MetricSpace& space) {
  const double q = cfg.exponent;
  require(q > 0, "exponent must be positive");
  require(cfg.K > 0, "K must be positive");
  require(cfg.slack >= 0, "slack must be nonnegative");
  if (is_umbel_family(id)) {
    require(pts.size() >= 3, "umbel inequalities need w, z and a nonempty xs");
  } else {
    require(pts.size() == arity(id), "wrong number of points for " + to_string(id));
  }
  for (const auto& pt : pts) space.check_point(pt);
  auto d = [&](std::size_t i, std::size_t j) { return space.distance(pts[i], pts[j]); };

  switch (id) {
    case InequalityId::PUmbel:
    case InequalityId::RelaxedPUmbel:
    case InequalityId::SuperRelaxedPUmbel: {
      const std::size_t w = 0, z = 1, m = pts.size() - 2;
      double near_w = kInf, far_z = 0, pair = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        near_w = std::min(near_w, powp(d(w, 2 + i), q));
        far_z = std::max(far_z, powp(d(z, 2 + i), q));
        // min over i of min over j > i; for distinct-index pairs this is also inf over i != j
        for (std::size_t j = i + 1; j < m; ++j) pair = std::min(pair, powp(d(2 + i, 2 + j), q));
      }
      if (m == 1) pair = 0;
      double lhs = near_w / std::pow(2.0, q) + pair / std::pow(cfg.K, q);
      double rhs = id == InequalityId::PUmbel ? 0.5 * powp(d(z, w), q) + 0.5 * far_z
                                              : std::max(powp(d(w, z), q), far_z);
      return finish(lhs, rhs, cfg.slack, pts);
    }
    case InequalityId::QTripod: {
      // (w, x, y, z)
      double lhs = std::pow(2.0, -q) * powp(d(0, 1), q) / 2 + std::pow(2.0, -q) * powp(d(0, 2), q) / 2 +
                   powp(d(1, 2), q) / std::pow(4 * cfg.K, q);
      double rhs = 0.5 * powp(d(3, 0), q) + 0.25 * powp(d(3, 1), q) + 0.25 * powp(d(3, 2), q);
      return finish(lhs, rhs, cfg.slack, pts);
    }
    case InequalityId::QFork:
    case InequalityId::RelaxedQFork: {
      double lhs = std::pow(2.0, -q) * std::min(powp(d(0, 1), q), powp(d(0, 2), q)) +
                   powp(d(1, 2), q) / (std::pow(4.0, q) * std::pow(cfg.K, q));
      double zx = std::max(powp(d(3, 1), q), powp(d(3, 2), q));
      double rhs = id == InequalityId::QFork ? 0.5 * powp(d(3, 0), q) + 0.5 * zx : std::max(powp(d(3, 0), q), zx);
      return finish(lhs, rhs, cfg.slack, pts);
    }
    case InequalityId::PUniformConvexity: {
      auto lp = space.as<LpSpace>();
      require(lp != nullptr, "uniform convexity needs a normed (lp) space");
      const auto& x = pts[0];
      const auto& y = pts[1];
      Point sum(x.size()), diff(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        sum[i] = x[i] + y[i];
        diff[i] = x[i] - y[i];
      }
      double lhs = powp(lp_norm(x, lp->p), q) + powp(lp_norm(y, lp->p), q) / std::pow(cfg.K, q);
      double rhs = 0.5 * (powp(lp_norm(sum, lp->p), q) + powp(lp_norm(diff, lp->p), q));
      return finish(lhs, rhs, cfg.slack, pts);
    }
    case InequalityId::MidpointCurvature: {
      // (x, y, z, m): 2 d(z,m)^2 + d(x,y)^2 / 2 >= d(z,x)^2 + d(z,y)^2
      double lhs = d(2, 0) * d(2, 0) + d(2, 1) * d(2, 1);
      double rhs = 2 * d(2, 3) * d(2, 3) + d(0, 1) * d(0, 1) / 2;
      return finish(lhs, rhs, cfg.slack, pts);
    }
    case InequalityId::HeisenbergParallelogram: {
      auto h = space.as<HeisenbergMetric>();
      require(h != nullptr, "parallelogram inequality needs a Heisenberg space");
      return check_parallelogram(h->group, q, cfg.C, to_hpoint(pts[0]), to_hpoint(pts[1]), cfg.slack);
    }
  }
  fail("unhandled inequality");
}

TupleSampler default_tuple_sampler(const MetricSpace& space, InequalityId id, std::size_t seq_len) {
  auto point = ball_sampler(space);
  std::size_t count = is_umbel_family(id) ? 2 + seq_len : arity(id);
  require(count >= 2 + (is_umbel_family(id) ? 1 : 0), "umbel sequences need at least one point");
  return [point, count](std::mt19937_64& rng) {
    PointTuple t;
    t.reserve(count);
    for (std::size_t i = 0; i < count; ++i) t.push_back(point(rng));
    return t;
  };
}

namespace {

constexpr std::size_t kChunk = 256;

std::vector<PointTuple> draw_samples(const TupleSampler& sampler, std::size_t n, std::uint64_t seed) {
  std::vector<PointTuple> out(n);
  std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(seed, c));
    std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = sampler(rng);
  });
  return out;
}

CampaignReport run_campaign(const MetricSpace& space, InequalityId id, const InequalityConfig& cfg,
                            const std::vector<PointTuple>& samples, std::uint64_t seed) {
  std::size_t n = samples.size();
  std::size_t chunks = (n + kChunk - 1) / kChunk;
  struct Partial {
    std::size_t violations = 0;
    double worst = kInf;
    std::size_t index = 0;
  };
  std::vector<Partial> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    auto& part = parts[c];
    std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto r = check_inequality(id, cfg, samples[i], space);
      if (!r.holds) ++part.violations;
      if (r.margin < part.worst) {
        part.worst = r.margin;
        part.index = i;
      }
    }
  });
  CampaignReport rep;
  rep.id = id;
  rep.cfg = cfg;
  rep.n = n;
  rep.seed = seed;
  for (const auto& part : parts) {
    rep.violations += part.violations;
    if (part.worst < rep.worst_margin) {
      rep.worst_margin = part.worst;
      rep.worst_index = part.index;
    }
  }
  if (n > 0) rep.worst_witness = samples[rep.worst_index];
  return rep;
}

}  // namespace

CampaignReport certify(const MetricSpace& space, InequalityId id, const InequalityConfig& cfg,
                       const TupleSampler& sampler, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "need at least one sample");
  return run_campaign(space, id, cfg, draw_samples(sampler, n, seed), seed);
}

double min_feasible_K(const MetricSpace& space, InequalityId id, const InequalityConfig& cfg,
                      const TupleSampler& sampler, std::size_t n, std::uint64_t seed, double lo, double hi,
                      double rel_width) {
  require(n >= 1, "need at least one sample");
  require(0 < lo && lo <= hi, "bad K bracket");
  require(rel_width > 0, "bisection width must be positive");
  auto samples = draw_samples(sampler, n, seed);
  auto feasible = [&](double K) {
    auto c = cfg;
    c.K = K;
    return run_campaign(space, id, c, samples, seed).violations == 0;
  };
  if (feasible(lo)) return lo;
  if (!feasible(hi)) throw Error(ErrorCode::NoSolution, "upper end of the K bracket is still infeasible");
  while (hi - lo > rel_width * hi) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

double umbel_condition(double p, double c, double K) {
  double e = 2 * c / K;
  double inner = 2 - std::pow(e, p);
  if (inner < 0) return kInf;
  return std::pow(e + std::pow(inner, 1.0 / p), p) / std::pow(2.0, p) + std::pow(2.0, p + 1) / K;
}

double solve_umbel_K(double p, double c) {
  require(c > 0, "c must be positive");
  if (!(p > 1)) throw Error(ErrorCode::NoSolution, "the umbel condition has no solution for p <= 1");
  double lo = 2 * c;
  if (umbel_condition(p, c, lo) <= 1) return lo;
  double hi = 2 * lo;
  while (umbel_condition(p, c, hi) > 1) {
    lo = hi;
    hi *= 2;
    if (hi > 1e15) throw Error(ErrorCode::NoSolution, "no feasible K found below 1e15");
  }
  while (hi - lo > 1e-13 * hi) {
    double mid = 0.5 * (lo + hi);
    if (umbel_condition(p, c, mid) <= 1) hi = mid; else lo = mid;
  }
  return hi;
}

std::vector<double> alpha_sequence(const MetricSpace& space, const Point& x, const Point& y, const Point& z,
                                   const Point& m, int n) {
  auto lp = space.as<LpSpace>();
  require(lp != nullptr && lp->p > 1 && std::isfinite(lp->p), "alpha sequence needs an lp space with 1 < p < inf");
  require(n >= 0, "count must be nonnegative");
  for (const auto* pt : {&x, &y, &z, &m}) space.check_point(*pt);
  require(space.distance(z, m) > 0, "z must differ from the midpoint");
  std::vector<double> out;
  Point zn = z;
  double dxy = space.distance(x, y);
  for (int i = 0; i <= n; ++i) {
    double dzm = space.distance(zn, m);
    double a = space.distance(zn, x), b = space.distance(zn, y);
    out.push_back((a * a + b * b - dxy * dxy / 2) / (dzm * dzm));
    for (std::size_t j = 0; j < zn.size(); ++j) zn[j] = m[j] + (zn[j] - m[j]) / 2;
  }
  return out;
}

namespace {

struct PlaneNorm {
  double p;
  double norm(double a, double b) const {
    double v[2] = {a, b};
    return lp_norm(v, p);
  }
  // point of the unit sphere in direction theta
  std::pair<double, double> sphere(double theta) const {
    double a = std::cos(theta), b = std::sin(theta);
    double r = norm(a, b);
    return {a / r, b / r};
  }
};

const LpSpace& modulus_space(const MetricSpace& space) {
  auto lp = space.as<LpSpace>();
  require(lp != nullptr, "moduli are defined for lp spaces");
  return *lp;
}

// Angle offset phi in (0, pi] with |u(theta) - u(theta + sign*phi)| = eps, by bisection.
double separation_offset(const PlaneNorm& pn, double theta, double sign, double eps) {
  auto [x1, x2] = pn.sphere(theta);
  auto gap = [&](double phi) {
    auto [y1, y2] = pn.sphere(theta + sign * phi);
    return pn.norm(x1 - y1, x2 - y2);
  };
  double lo = 0, hi = M_PI;
  if (gap(hi) < eps) return hi;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (gap(mid) < eps) lo = mid; else hi = mid;
  }
  return hi;
}

// Minimizes f over [0, 2pi) on a grid, then golden-section refines around the best cell.
template <class F>
double grid_minimize(F f, std::size_t grid, std::size_t& evals) {
  double best = kInf, arg = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    double th = 2 * M_PI * static_cast<double>(i) / static_cast<double>(grid);
    double v = f(th);
    ++evals;
    if (v < best) {
      best = v;
      arg = th;
    }
  }
  double h = 2 * M_PI / static_cast<double>(grid);
  double a = arg - h, b = arg + h;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
    evals += 1;
  }
  return std::min({best, fc, fd});
}

}  // namespace

ModulusEstimate modulus_delta(const MetricSpace& space, double eps, std::size_t grid) {
  const auto& lp = modulus_space(space);
  require(eps > 0 && eps <= 2, "eps must lie in (0, 2]");
  require(grid >= 8, "grid resolution must be at least 8");
  ModulusEstimate est{eps, 0, grid, 0};
  if (lp.dim == 1) {
    // On the line the extremal pair is x = 1, y = 1 - eps.
    double best = kInf;
    for (std::size_t i = 0; i <= grid; ++i) {
      double x = -1 + 2 * static_cast<double>(i) / static_cast<double>(grid);
      for (double y : {x - eps, x + eps}) {
        if (std::abs(y) > 1) continue;
        best = std::min(best, 1 - std::abs(x + y) / 2);
        ++est.configurations;
      }
    }
    best = std::min(best, eps / 2);
    est.value = std::clamp(best, 0.0, 1.0);
    return est;
  }
  PlaneNorm pn{lp.p};
  auto f = [&](double theta) {
    double best = kInf;
    for (double sign : {1.0, -1.0}) {
      auto [x1, x2] = pn.sphere(theta);
      auto [y1, y2] = pn.sphere(theta + sign * separation_offset(pn, theta, sign, eps));
      best = std::min(best, 1 - pn.norm(x1 + y1, x2 + y2) / 2);
    }
    return best;
  };
  est.value = std::clamp(grid_minimize(f, grid, est.configurations), 0.0, 1.0);
  return est;
}

ModulusEstimate modulus_delta_tilde(const MetricSpace& space, double eps, std::size_t grid) {
  const auto& lp = modulus_space(space);
  require(eps > 0 && eps <= 2, "eps must lie in (0, 2]");
  require(grid >= 8, "grid resolution must be at least 8");
  ModulusEstimate est{eps, 0, grid, 0};
  if (lp.dim == 1) {
    // x_1 = 1, x_2 = 1 - eps and z = -1 is extremal on the line.
    est.value = std::clamp(1 - (2 - eps) / 2, 0.0, 1.0);
    est.configurations = 1;
    return est;
  }
  PlaneNorm pn{lp.p};
  auto f = [&](double theta) {
    double best = kInf;
    for (double sign : {1.0, -1.0}) {
      auto [x1, x2] = pn.sphere(theta);
      auto [y1, y2] = pn.sphere(theta + sign * separation_offset(pn, theta, sign, eps));
      std::size_t inner = 0;
      auto g = [&](double psi) {
        auto [z1, z2] = pn.sphere(psi);
        return std::max(1 - pn.norm(z1 - x1, z2 - x2) / 2, 1 - pn.norm(z1 - y1, z2 - y2) / 2);
      };
      best = std::min(best, grid_minimize(g, grid, inner));
      est.configurations += inner;
    }
    return best;
  };
  std::size_t outer = 0;
  est.value = std::clamp(grid_minimize(f, grid, outer), 0.0, 1.0);
  return est;
}

ModulusEstimate modulus_beta(const MetricSpace& space, double t, std::size_t m, std::size_t grid) {
  const auto& lp = modulus_space(space);
  require(t > 0, "separation must be positive");
  require(m >= 2, "family size must be at least 2");
  require(grid >= 8, "grid resolution must be at least 8");
  require(lp.dim <= 3, "beta grid search supports dimension at most 3");
  std::vector<Point> pts;
  std::vector<std::size_t> idx(lp.dim, 0);
  for (;;) {
    Point v(lp.dim);
    for (std::size_t i = 0; i < lp.dim; ++i) v[i] = -1 + 2 * static_cast<double>(idx[i]) / static_cast<double>(grid - 1);
    if (lp_norm(v, lp.p) <= 1 + 1e-12) pts.push_back(v);
    std::size_t k = 0;
    while (k < lp.dim && ++idx[k] == grid) idx[k++] = 0;
    if (k == lp.dim) break;
  }
  const std::size_t n = pts.size();
  std::vector<double> val(n * n), sep(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double dist = space.distance(pts[a], pts[b]);
      sep[a * n + b] = dist;
      val[a * n + b] = 1 - dist / 2;  // z = a, x = b
    }
  ModulusEstimate est{t, kInf, grid, 0};
  std::vector<std::size_t> chosen;
  const std::size_t budget = 200'000'000;
  std::size_t work = 0;
  auto evaluate = [&]() {
    double best = kInf;
    for (std::size_t z = 0; z < n; ++z) {
      double worst = -kInf;
      for (auto x : chosen) worst = std::max(worst, val[z * n + x]);
      best = std::min(best, worst);
    }
    work += n * chosen.size();
    ++est.configurations;
    est.value = std::min(est.value, best);
  };
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (chosen.size() == m) {
      evaluate();
      if (work > budget) throw Error(ErrorCode::Budget, "beta grid search exceeded its budget");
      return;
    }
    for (std::size_t c = start; c < n; ++c) {
      bool ok = true;
      for (auto x : chosen) ok = ok && sep[x * n + c] >= t - 1e-12;
      if (!ok) continue;
      chosen.push_back(c);
      self(self, c + 1);
      chosen.pop_back();
    }
  };
  rec(rec, 0);
  if (est.configurations == 0) fail("no separated family exists at this grid scale");
  est.value = std::clamp(est.value, 0.0, 1.0);
  return est;
}

RamseyResult ramsey_refine(const MetricSpace& space, const Point& w, const Point& z, const std::vector<Point>& xs,
                           double p, double K, std::size_t N, std::size_t m) {
  require(m >= 1 && m <= 5, "subset size must be between 1 and 5");
  require(N >= 1, "bucket count must be positive");
  require(p > 0 && K > 0, "p and K must be positive");
  require(xs.size() >= m, "not enough points");
  const std::size_t n = xs.size();
  auto bucket = [&](double v) { return static_cast<long long>(std::floor(v * static_cast<double>(N))); };
  std::vector<double> wv(n), zv(n), pv(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    wv[i] = std::pow(space.distance(w, xs[i]), p) / std::pow(2.0, p);
    zv[i] = std::pow(space.distance(z, xs[i]), p) / 2;
    for (std::size_t j = 0; j < n; ++j) pv[i * n + j] = std::pow(space.distance(xs[i], xs[j]), p) / std::pow(K, p);
  }
  std::vector<std::size_t> chosen;
  bool found = false;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (chosen.size() == m) {
      found = true;
      return;
    }
    for (std::size_t c = start; c < n && !found; ++c) {
      bool ok = true;
      if (!chosen.empty()) {
        auto f = chosen.front();
        ok = bucket(wv[c]) == bucket(wv[f]) && bucket(zv[c]) == bucket(zv[f]);
        long long pb = chosen.size() >= 2 ? bucket(pv[chosen[0] * n + chosen[1]]) : bucket(pv[f * n + c]);
        for (auto x : chosen) ok = ok && bucket(pv[x * n + c]) == pb;
      }
      if (!ok) continue;
      chosen.push_back(c);
      self(self, c + 1);
      if (!found) chosen.pop_back();
    }
  };
  rec(rec, 0);
  if (!found) throw Error(ErrorCode::NoFeasible, "no monochromatic subset of the requested size");
  RamseyResult out;
  out.indices = chosen;
  auto osc = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };
  std::vector<double> a, b, c;
  for (std::size_t i = 0; i < m; ++i) {
    a.push_back(wv[chosen[i]]);
    b.push_back(zv[chosen[i]]);
    for (std::size_t j = i + 1; j < m; ++j) c.push_back(pv[chosen[i] * n + chosen[j]]);
  }
  out.w_oscillation = osc(a);
  out.z_oscillation = osc(b);
  out.pair_oscillation = osc(c);
  return out;
}

}  // namespace umbel
