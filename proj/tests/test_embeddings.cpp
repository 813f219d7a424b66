#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "umbel/embeddings.hpp"

using namespace umbel;

namespace {

Distortion distortion_oracle(const TreeMap& f) {
  Distortion d;
  for (std::size_t a = 0; a < f.tree().size(); ++a)
    for (std::size_t b = 0; b < f.tree().size(); ++b) {
      if (a == b) continue;
      double dy = f.distance(a, b), dt = f.tree().distance(a, b);
      d.lip = std::max(d.lip, dy / dt);
      d.colip = std::max(d.colip, dt / dy);
    }
  d.dist = d.lip * d.colip;
  return d;
}

TreeMap scaled(const TreeMap& f, double s) {
  auto pts = f.assignment();
  for (auto& pt : pts)
    for (auto& c : pt) c *= s;
  return TreeMap(f.tree_ptr(), f.target(), std::move(pts));
}

// Right side of the compression bound with the cotype constant replaced by lhs / lip^p.
void check_compression_chain(const TreeMap& f, double p) {
  const int h = f.spec().height;
  int k = 0;
  while ((1 << k) < h) ++k;
  auto m = moduli(f);
  double cot = lhs(InvariantId::UmbelCotype, f, p);
  double sum = 0;
  for (int s = 1; s <= k - 1; ++s) sum += std::pow(m.rho(std::pow(2, s + 1)), p) / std::pow(2, s * p);
  CHECK(sum <= cot + 1e-9);
  if (k >= 2) {
    double integral = compression_integral(m.rho, p, std::pow(2, k - 1));
    double lp = std::pow(lipschitz_constant(f), p);
    double w1 = std::pow(m.omega(1), p);
    CHECK(integral <= (std::pow(2, p) - 1) / p * cot / lp * w1 + 1e-9);
    CHECK(integral <= (std::pow(2, p) - 1) / p * cot * w1 + 1e-9);
  }
}

}  // namespace

TEST_CASE("bourgain map examples") {
  auto f0 = bourgain_embed(TreeSpec::increasing(0, 1), 2);
  REQUIRE(f0.tree().size() == 1);
  CHECK(f0.at(0) == Point{1.0});
  CHECK(distortion(f0).dist == 1);

  auto f = bourgain_embed(TreeSpec::increasing(2, 4), 2);
  const auto& t = f.tree();
  CHECK(f.distance(0, t.index_of({1})) == doctest::Approx(std::sqrt(std::pow(std::sqrt(2) - 1, 2) + 1)));
  CHECK(f.distance(0, t.index_of({1})) == doctest::Approx(1.08239).epsilon(1e-5));
  for (std::size_t v = 0; v < t.size(); ++v) CHECK(bourgain_label(t, v) == 4 + v);

  // each vertex at depth j carries weights sqrt(j+1), sqrt(j), ..., 1 along its ancestry
  for (std::size_t v = 0; v < t.size(); ++v) {
    double sq = 0;
    for (double c : f.at(v)) sq += c * c;
    int j = t.depth(v);
    CHECK(sq == doctest::Approx((j + 1) * (j + 2) / 2.0));
  }
  CHECK_THROWS_AS(bourgain_embed(TreeSpec::increasing(2, 4), 1), Error);
  CHECK_THROWS_AS(bourgain_embed(TreeSpec::increasing(2, 4), 0.5), Error);
  CHECK_NOTHROW(bourgain_embed(TreeSpec::increasing(2, 4), 1, BourgainVariant::L1));
  CHECK(parse_bourgain_variant("linf") == BourgainVariant::Linf);
  CHECK_THROWS_AS(parse_bourgain_variant("l7"), Error);
}

TEST_CASE("distortion against full pair scan") {
  for (auto spec : {TreeSpec::increasing(2, 4), TreeSpec::increasing(4, 6), TreeSpec::increasing(3, 5)}) {
    for (auto var : {BourgainVariant::Lp, BourgainVariant::L1, BourgainVariant::Linf}) {
      auto f = bourgain_embed(spec, 2, var);
      auto d = distortion(f);
      auto o = distortion_oracle(f);
      CHECK(d.lip == o.lip);
      CHECK(d.colip == o.colip);
      CHECK(d.dist == o.dist);
      CHECK(d.dist >= 1);
      CHECK(std::isfinite(d.dist));
    }
  }
  auto id = TreeMap::identity(TreeSpec::binary(3));
  auto d = distortion(id);
  CHECK(d.lip == 1);
  CHECK(d.colip == 1);
  CHECK(d.dist == 1);
  auto f = bourgain_embed(TreeSpec::increasing(3, 5), 2);
  CHECK(distortion(scaled(f, 3.5)).dist == doctest::Approx(distortion(f).dist).epsilon(1e-12));
  CHECK_THROWS_AS(distortion(TreeMap::constant(TreeSpec::binary(2))), Error);
}

TEST_CASE("distortion is one exactly for scaled isometries") {
  std::mt19937_64 rng(3);
  auto spec = TreeSpec::binary(2);
  auto tree = std::make_shared<const Tree>(spec);
  {
    std::vector<std::vector<double>> rows(tree->size(), std::vector<double>(tree->size()));
    std::vector<Point> idx;
    for (std::size_t a = 0; a < tree->size(); ++a) {
      idx.push_back({static_cast<double>(a)});
      for (std::size_t b = 0; b < tree->size(); ++b) rows[a][b] = 0.25 * tree->distance(a, b);
    }
    TreeMap quarter(tree, MetricSpace::finite(make_finite_matrix(rows)), idx);
    CHECK(distortion(quarter).dist == doctest::Approx(1.0));
  }
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = TreeMap::identity(spec).assignment();
    std::size_t a = 1 + rng() % (tree->size() - 1), b = 1 + rng() % (tree->size() - 1);
    if (a == b) continue;
    std::swap(pts[a], pts[b]);
    TreeMap g(tree, TreeMap::identity(spec).target(), pts);
    bool iso = true;
    for (std::size_t u = 0; u < tree->size(); ++u)
      for (std::size_t v = 0; v < tree->size(); ++v) iso = iso && g.distance(u, v) == tree->distance(u, v);
    if (iso)
      CHECK(distortion(g).dist == doctest::Approx(1.0));
    else
      CHECK(distortion(g).dist > 1);
  }
}

TEST_CASE("bourgain growth") {
  double prev = 0;
  for (int h : {2, 4, 8}) {
    double d = distortion(bourgain_embed(TreeSpec::increasing(h, h + 2), 2)).dist;
    CHECK(d >= prev);
    CHECK(d <= 4 * std::sqrt(std::log2(2.0 * h)));
    prev = d;
  }
}

TEST_CASE("moduli") {
  auto id = TreeMap::identity(TreeSpec::increasing(3, 5));
  auto m = moduli(id);
  for (int t = 1; t <= 6; ++t) {
    CHECK(m.rho(t) == t);
    CHECK(m.omega(t) == t);
  }
  CHECK_NOTHROW(m.rho.validate());
  CHECK_NOTHROW(m.omega.validate());

  auto spec = TreeSpec::binary(2);
  auto pts = TreeMap::identity(spec).assignment();
  auto tree = std::make_shared<const Tree>(spec);
  pts[tree->index_of({1})] = pts[tree->index_of({-1})];
  auto collapsed = TreeMap(tree, TreeMap::identity(spec).target(), pts);
  auto mc = moduli(collapsed);
  CHECK(mc.rho(2) == 0);
  CHECK(mc.rho(1) == 0);

  auto f = bourgain_embed(TreeSpec::increasing(4, 6), 2);
  auto mf = moduli(f);
  for (int t = 1; t <= 8; ++t) {
    double lo = kInf, hi = 0;
    for (std::size_t a = 0; a < f.tree().size(); ++a)
      for (std::size_t b = a + 1; b < f.tree().size(); ++b)
        if (f.tree().distance(a, b) >= t) lo = std::min(lo, f.distance(a, b));
    for (std::size_t a = 0; a < f.tree().size(); ++a)
      for (std::size_t b = a + 1; b < f.tree().size(); ++b)
        if (f.tree().distance(a, b) <= t) hi = std::max(hi, f.distance(a, b));
    CHECK(mf.rho(t) > 0);
    CHECK(mf.rho(t) == doctest::Approx(lo));
    CHECK(mf.omega(t) == doctest::Approx(hi));
  }
  CHECK_THROWS_AS(moduli(TreeMap::constant(spec)), Error);
}

TEST_CASE("compression integral") {
  CHECK(compression_integral(ModulusCurve::identity(10), 2, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  ModulusCurve root;
  for (int i = 0; i <= 200000; ++i) {
    double t = 1 + i * (99.0 / 200000);
    root.t.push_back(t);
    root.v.push_back(std::sqrt(t));
  }
  CHECK(compression_integral(root, 2, 100) == doctest::Approx(0.99).epsilon(1e-3));
  ModulusCurve zero{{0.0, 5.0}, {0.0, 0.0}};
  CHECK(compression_integral(zero, 2, 4) == 0);
  CHECK_THROWS_AS(compression_integral(zero, 2, 1), Error);

  // a step curve with one jump has a two-term closed form
  ModulusCurve step{{0.0, 2.0}, {1.0, 3.0}};
  double p = 1.5, T = 5;
  double expected = (1 - std::pow(2, -p)) / p + std::pow(3, p) * (std::pow(2, -p) - std::pow(T, -p)) / p;
  CHECK(compression_integral(step, p, T) == doctest::Approx(expected).epsilon(1e-12));

  // affine pieces with nonzero intercept go through quadrature; compare to a midpoint sum
  ModulusCurve lin{{0.0, 3.0, 6.0}, {1.0, 2.0, 8.0}, ModulusCurve::Interpolation::Linear};
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double t = 1 + (i + 0.5) * (9.0 / n);
    sum += std::pow(lin(t) / t, 2) / t * (9.0 / n);
  }
  CHECK(compression_integral(lin, 2, 10) == doctest::Approx(sum).epsilon(1e-6));
}

TEST_CASE("compression chain") {
  for (int h : {4, 8})
    for (double p : {1.0, 2.0}) {
      check_compression_chain(TreeMap::identity(TreeSpec::increasing(h, h + 2)), p);
      if (p > 1) check_compression_chain(bourgain_embed(TreeSpec::increasing(h, h + 2), p), p);
    }
}

TEST_CASE("lifting through an identity quotient") {
  auto spec = TreeSpec::binary(2);
  auto tree = std::make_shared<const Tree>(spec);
  QuotientOracle o;
  std::vector<std::vector<double>> rows{{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
  o.X = MetricSpace::finite(make_finite_matrix(rows));
  o.Y = o.X;
  for (double i : {0.0, 1.0, 2.0}) {
    o.Z.push_back({i});
    o.fZ.push_back({i});
  }
  o.C = 1;
  o.K = 0;
  CHECK(validate_quotient(o, o.Z).empty());
  std::vector<Point> g_pts;
  for (std::size_t v = 0; v < tree->size(); ++v) g_pts.push_back({static_cast<double>(tree->depth(v))});
  TreeMap g(tree, o.Y, g_pts);
  auto lift = lift_map(g, o, 1, 0);
  for (std::size_t v = 0; v < tree->size(); ++v) CHECK(lift.h.at(v) == g.at(v));
  auto chk = verify_lift(g, o, lift, 1, 0);
  CHECK(chk.upper_failures == 0);
  CHECK(chk.identity_failures == 0);
}

TEST_CASE("lifting random quotients") {
  auto tree = std::make_shared<const Tree>(TreeSpec::binary(2));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto o = random_quotient(seed, 12);
    std::size_t ny = o.Y.finite_size();
    std::vector<Point> ys;
    for (std::size_t y = 0; y < ny; ++y) ys.push_back({static_cast<double>(y)});
    REQUIRE(validate_quotient(o, ys).empty());
    std::mt19937_64 rng(seed + 1000);
    std::vector<Point> pts;
    for (std::size_t v = 0; v < tree->size(); ++v) pts.push_back({static_cast<double>(rng() % ny)});
    TreeMap g(tree, o.Y, pts);
    auto lift = lift_map(g, o, o.C, o.K);
    // independent recheck of both postconditions
    for (std::size_t v = 0; v < tree->size(); ++v) {
      CHECK(o.Y.distance(o.fZ[lift.z_index[v]], g.at(v)) <= o.K * (1 + 1e-9) + 1e-12);
      if (v == 0) continue;
      std::size_t u = tree->parent(v);
      CHECK(o.X.distance(lift.h.at(u), lift.h.at(v)) <= (o.C * g.target().distance(g.at(u), g.at(v)) + o.C * o.K) * (1 + 1e-9) + 1e-12);
    }
    auto chk = verify_lift(g, o, lift, o.C, o.K);
    CHECK(chk.upper_failures == 0);
    CHECK(chk.identity_failures == 0);
  }
}

TEST_CASE("lifting rejects values outside the K neighbourhood") {
  QuotientOracle o;
  o.X = MetricSpace::lp(1, 2);
  o.Y = MetricSpace::lp(1, 2);
  o.Z = {{0.0}, {1.0}};
  o.fZ = {{0.0}, {1.0}};
  o.C = 1;
  o.K = 0.5;
  auto tree = std::make_shared<const Tree>(TreeSpec::binary(1));
  TreeMap far(tree, o.Y, {{0.0}, {2.0}, {0.0}});
  CHECK_THROWS_AS(lift_map(far, o, 1, 0.5), Error);
  TreeMap root_far(tree, o.Y, {{-1.0}, {0.0}, {0.0}});
  CHECK_THROWS_AS(lift_map(root_far, o, 1, 0.5), Error);
  CHECK_FALSE(validate_quotient(o, {{2.0}}).empty());
}
