#include "umbel/embeddings.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

namespace umbel {

BourgainVariant parse_bourgain_variant(const std::string& name) {
  if (name == "lp") return BourgainVariant::Lp;
  if (name == "l1") return BourgainVariant::L1;
  if (name == "linf") return BourgainVariant::Linf;
  fail("unknown embedding variant: " + name);
}

std::size_t bourgain_label(const Tree& tree, std::size_t v) {
  return 2 * static_cast<std::size_t>(tree.spec().height) + v;
}

TreeMap bourgain_embed(const TreeSpec& spec, double p, BourgainVariant variant) {
  require(spec.kind == TreeKind::Increasing, "the embedding is defined on increasing trees");
  double target_p = 1.0;
  double q = 1.0;
  if (variant == BourgainVariant::Lp) {
    require(p > 1 && std::isfinite(p), "the lp embedding needs 1 < p < inf");
    q = p / (p - 1);
    target_p = p;
  } else if (variant == BourgainVariant::Linf) {
    target_p = kInf;
  }
  auto tree = std::make_shared<const Tree>(spec);
  const std::size_t n = tree->size();
  const std::size_t offset = bourgain_label(*tree, 0);
  std::vector<Point> pts(n, Point(n, 0.0));
  for (std::size_t v = 0; v < n; ++v) {
    const int j = tree->depth(v);
    std::size_t a = v;
    for (int i = j; i >= 0; --i) {  // a is the prefix of length i
      double m = j - i + 1;
      double c = variant == BourgainVariant::Lp ? std::pow(m, 1.0 / q) : variant == BourgainVariant::L1 ? 1.0 : m;
      pts[v][bourgain_label(*tree, a) - offset] = c;
      if (i > 0) a = tree->parent(a);
    }
  }
  return TreeMap(tree, MetricSpace::lp(n, target_p), std::move(pts));
}

Distortion distortion(const TreeMap& f) {
  const Tree& tree = f.tree();
  const std::size_t n = tree.size();
  if (n == 1) return {1.0, 1.0, 1.0};
  struct Row {
    double lip = 0, colip = 0;
    bool moved = false;
  };
  std::vector<Row> rows(n);
  parallel_for(n, [&](std::size_t u) {
    auto& r = rows[u];
    for (std::size_t v = u + 1; v < n; ++v) {
      double dy = f.distance(u, v);
      double dt = tree.distance(u, v);
      r.moved = r.moved || dy > 0;
      r.lip = std::max(r.lip, dy / dt);
      r.colip = std::max(r.colip, dy > 0 ? dt / dy : kInf);
    }
  });
  Distortion out;
  bool moved = false;
  for (const auto& r : rows) {
    moved = moved || r.moved;
    out.lip = std::max(out.lip, r.lip);
    out.colip = std::max(out.colip, r.colip);
  }
  require(moved, "distortion of a constant map is undefined");
  out.dist = out.lip * out.colip;
  return out;
}

double ModulusCurve::operator()(double x) const {
  if (t.empty() || x < t.front()) return 0.0;
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  if (interpolation == Interpolation::Step || i + 1 == t.size()) return v[i];
  double w = (x - t[i]) / (t[i + 1] - t[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

void ModulusCurve::validate() const {
  require(t.size() == v.size(), "curve breakpoints and values differ in length");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]) && std::isfinite(v[i]) && v[i] >= 0, "curve entries must be finite and nonnegative");
    if (i > 0) require(t[i] > t[i - 1], "curve breakpoints must increase");
    if (i > 0) require(v[i] >= v[i - 1], "curve values must be nondecreasing");
  }
}

ModulusCurve ModulusCurve::identity(double T) {
  require(T > 0, "curve range must be positive");
  return ModulusCurve{{0.0, T}, {0.0, T}, Interpolation::Linear};
}

Moduli moduli(const TreeMap& f) {
  const Tree& tree = f.tree();
  const std::size_t n = tree.size();
  const int D = 2 * tree.spec().height;
  std::vector<std::vector<double>> lo(n), hi(n);
  parallel_for(n, [&](std::size_t u) {
    lo[u].assign(D + 1, kInf);
    hi[u].assign(D + 1, -kInf);
    for (std::size_t v = u + 1; v < n; ++v) {
      int dt = tree.distance(u, v);
      double dy = f.distance(u, v);
      lo[u][dt] = std::min(lo[u][dt], dy);
      hi[u][dt] = std::max(hi[u][dt], dy);
    }
  });
  std::vector<double> rmin(D + 1, kInf), rmax(D + 1, -kInf);
  for (std::size_t u = 0; u < n; ++u)
    for (int t = 0; t <= D; ++t) {
      rmin[t] = std::min(rmin[t], lo[u][t]);
      rmax[t] = std::max(rmax[t], hi[u][t]);
    }
  bool moved = false;
  for (double x : rmax) moved = moved || x > 0;
  require(moved, "moduli of a constant map are undefined");
  Moduli out;
  out.rho.t.push_back(0);
  out.rho.v.push_back(0);
  out.omega.t.push_back(0);
  out.omega.v.push_back(0);
  for (int t = 1; t <= D; ++t) {
    if (rmin[t] == kInf) continue;  // distance not attained
    out.rho.t.push_back(t);
    out.rho.v.push_back(rmin[t]);
    out.omega.t.push_back(t);
    out.omega.v.push_back(rmax[t]);
  }
  for (std::size_t i = out.rho.v.size() - 1; i-- > 0;) out.rho.v[i] = std::min(out.rho.v[i], out.rho.v[i + 1]);
  for (std::size_t i = 1; i < out.omega.v.size(); ++i) out.omega.v[i] = std::max(out.omega.v[i], out.omega.v[i - 1]);
  return out;
}

double compression_integral(const ModulusCurve& rho, double p, double T) {
  require(T > 1, "upper limit must exceed 1");
  require(p > 0, "exponent must be positive");
  require(rho.t.size() == rho.v.size(), "curve breakpoints and values differ in length");
  // Cells [a, b) on which rho is a single step or a single linear piece.
  std::vector<double> cuts{1.0};
  for (double x : rho.t)
    if (x > 1 && x < T) cuts.push_back(x);
  cuts.push_back(T);
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    bool linear = rho.interpolation == ModulusCurve::Interpolation::Linear && !rho.t.empty() && a >= rho.t.front() &&
                  a < rho.t.back();
    if (!linear) {
      double v = rho(a);
      total += std::pow(v, p) * (std::pow(a, -p) - std::pow(b, -p)) / p;
      continue;
    }
    double va = rho(a), vb = rho(std::nextafter(b, a));
    double slope = (vb - va) / (std::nextafter(b, a) - a);
    double icpt = va - slope * a;
    if (std::abs(icpt) <= kAbsTol * std::max(1.0, std::abs(va))) {
      total += std::pow(slope, p) * std::log(b / a);
      continue;
    }
    // substitute t = e^u: the integrand becomes (icpt e^{-u} + slope)^p
    auto g = [&](double u) { return std::pow(std::max(0.0, icpt * std::exp(-u) + slope), p); };
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, std::log(a), std::log(b), 15, 1e-14);
  }
  return total;
}

std::string validate_quotient(const QuotientOracle& o, const std::vector<Point>& ys) {
  if (o.Z.empty() || o.Z.size() != o.fZ.size()) return "Z and f(Z) must be nonempty and aligned";
  if (!(o.C > 0) || !(o.K >= 0)) return "C must be positive and K nonnegative";
  for (const auto& y : ys) {
    double best = kInf;
    for (const auto& fz : o.fZ) best = std::min(best, o.Y.distance(fz, y));
    if (!approx_le(best, o.K)) return "a target point is farther than K from f(Z)";
  }
  for (std::size_t x = 0; x < o.Z.size(); ++x) {
    for (const auto& y : ys) {
      double m = kInf;
      for (std::size_t z = 0; z < o.Z.size(); ++z)
        if (approx_le(o.Y.distance(o.fZ[z], y), o.K)) m = std::min(m, o.X.distance(o.Z[x], o.Z[z]));
      if (!approx_le(m, o.C * o.Y.distance(o.fZ[x], y))) return "co-condition fails";
    }
  }
  return {};
}

Lift lift_map(const TreeMap& g, const QuotientOracle& o, double C, double K) {
  require(!o.Z.empty() && o.Z.size() == o.fZ.size(), "Z and f(Z) must be nonempty and aligned");
  require(C > 0 && K >= 0, "C must be positive and K nonnegative");
  require(g.target().point_size() == o.Y.point_size(), "map target does not match the quotient target");
  const Tree& tree = g.tree();
  std::vector<std::size_t> idx(tree.size());
  for (std::size_t v = 0; v < tree.size(); ++v) {
    const Point& y = g.at(v);
    double radius = kInf;
    const Point* anchor = nullptr;
    if (v > 0) {
      std::size_t u = tree.parent(v);
      anchor = &o.Z[idx[u]];
      radius = C * (o.Y.distance(g.at(u), y) + K);
    }
    bool found = false;
    for (std::size_t z = 0; z < o.Z.size() && !found; ++z) {
      if (anchor && !approx_le(o.X.distance(*anchor, o.Z[z]), radius)) continue;
      if (!approx_le(o.Y.distance(o.fZ[z], y), K)) continue;
      idx[v] = z;
      found = true;
    }
    if (!found) {
      if (v == 0) fail("a map value is farther than K from f(Z)");
      fail("no admissible preimage; the quotient hypotheses fail");
    }
  }
  std::vector<Point> pts;
  for (auto z : idx) pts.push_back(o.Z[z]);
  return Lift{idx, TreeMap(g.tree_ptr(), o.X, std::move(pts))};
}

LiftCheck verify_lift(const TreeMap& g, const QuotientOracle& o, const Lift& lift, double C, double K) {
  const Tree& tree = g.tree();
  LiftCheck out;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (!approx_le(o.Y.distance(o.fZ[lift.z_index[v]], g.at(v)), K)) ++out.identity_failures;
    if (v == 0) continue;
    std::size_t u = tree.parent(v);
    double lhs = o.X.distance(lift.h.at(u), lift.h.at(v));
    if (!approx_le(lhs, C * g.target().distance(g.at(u), g.at(v)) + C * K)) ++out.upper_failures;
  }
  return out;
}

QuotientOracle random_quotient(std::uint64_t seed, std::size_t max_points) {
  require(max_points >= 2, "need at least two points");
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::uniform_int_distribution<std::size_t> count(2, max_points);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::size_t nz = count(rng), ny = count(rng);
  QuotientOracle o;
  o.X = MetricSpace::lp(2, 2);
  for (std::size_t i = 0; i < nz; ++i) o.Z.push_back({coord(rng), coord(rng)});
  std::vector<Point> ypts;
  for (std::size_t i = 0; i < ny; ++i) ypts.push_back({coord(rng), coord(rng)});
  std::vector<std::vector<double>> rows(ny, std::vector<double>(ny));
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = 0; j < ny; ++j) rows[i][j] = o.X.distance(ypts[i], ypts[j]);
  o.Y = MetricSpace::finite(make_finite_matrix(rows));
  std::uniform_int_distribution<std::size_t> pick(0, ny - 1);
  for (std::size_t i = 0; i < nz; ++i) o.fZ.push_back({static_cast<double>(pick(rng))});

  std::vector<Point> ys;
  for (std::size_t y = 0; y < ny; ++y) ys.push_back({static_cast<double>(y)});
  double cover = 0;
  for (const auto& y : ys) {
    double best = kInf;
    for (const auto& fz : o.fZ) best = std::min(best, o.Y.distance(fz, y));
    cover = std::max(cover, best);
  }
  o.K = cover * (1 + std::uniform_real_distribution<double>(0.0, 0.5)(rng));
  double C = 0;
  for (std::size_t x = 0; x < nz; ++x)
    for (const auto& y : ys) {
      double dy = o.Y.distance(o.fZ[x], y);
      if (dy <= 0) continue;
      double m = kInf;
      for (std::size_t z = 0; z < nz; ++z)
        if (o.Y.distance(o.fZ[z], y) <= o.K) m = std::min(m, o.X.distance(o.Z[x], o.Z[z]));
      C = std::max(C, m / dy);
    }
  o.C = std::max(C, 1e-6) * (1 + 1e-9);
  double L = 0;
  for (std::size_t a = 0; a < nz; ++a)
    for (std::size_t b = a + 1; b < nz; ++b) {
      double dx = o.X.distance(o.Z[a], o.Z[b]);
      if (dx > 0) L = std::max(L, o.Y.distance(o.fZ[a], o.fZ[b]) / dx);
    }
  o.L = L;
  o.A = 0;
  return o;
}

}  // namespace umbel
