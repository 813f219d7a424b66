#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "umbel/spaces.hpp"

using namespace umbel;

namespace {

HPoint random_hpoint(std::mt19937_64& rng, std::size_t dim, double scale = 3.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  HPoint a;
  for (std::size_t i = 0; i < dim; ++i) a.x.push_back(u(rng));
  a.s = u(rng);
  return a;
}

bool rel_close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("normed and product distances") {
  CHECK(MetricSpace::lp(2, 2).distance(Point{0, 0}, Point{3, 4}) == doctest::Approx(5));
  CHECK(MetricSpace::lp(2, 1).distance(Point{0, 0}, Point{3, 4}) == doctest::Approx(7));
  CHECK(MetricSpace::lp(2, kInf).distance(Point{0, 0}, Point{3, 4}) == doctest::Approx(4));
  CHECK(MetricSpace::lp(2, 3).distance(Point{0, 0}, Point{3, 4}) == doctest::Approx(std::cbrt(27.0 + 64.0)));
  auto prod = MetricSpace::product({MetricSpace::lp(1, 2), MetricSpace::lp(1, 2)}, 2);
  CHECK(prod.point_size() == 2);
  CHECK(prod.distance(Point{0, 0}, Point{3, 4}) == doctest::Approx(5));
  CHECK_THROWS_AS(MetricSpace::lp(2, 2).check_point(Point{1, 2, 3}), Error);
}

TEST_CASE("finite matrices are validated") {
  auto m = make_finite_matrix({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  CHECK(m.at(0, 2) == 2);
  CHECK_THROWS_AS(make_finite_matrix({{0, 1}, {2, 0}}), Error);
  CHECK_THROWS_AS(make_finite_matrix({{1, 1}, {1, 0}}), Error);
  CHECK_THROWS_AS(make_finite_matrix({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), Error);
  auto space = MetricSpace::finite(m);
  CHECK(space.finite_size() == 3);
  CHECK(space.distance(Point{0}, Point{2}) == 2);
  CHECK_THROWS_AS(space.check_point(Point{3}), Error);
  CHECK_THROWS_AS(space.check_point(Point{0.5}), Error);
}

TEST_CASE("heisenberg group law") {
  auto sp = HeisenbergSpace::standard(2);
  CHECK(h_mul(sp, {{1, 0}, 0}, {{0, 1}, 0}) == HPoint{{1, 1}, 1});
  CHECK(h_inv({{3, 4}, 2}) == HPoint{{-3, -4}, -2});
  CHECK(h_dilate(2, {{1, 1}, 1}) == HPoint{{2, 2}, 4});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto a = random_hpoint(rng, 2), b = random_hpoint(rng, 2), c = random_hpoint(rng, 2);
    auto ab_c = h_mul(sp, h_mul(sp, a, b), c);
    auto a_bc = h_mul(sp, a, h_mul(sp, b, c));
    CHECK(rel_close(ab_c.s, a_bc.s));
    auto e = h_mul(sp, a, h_inv(a));
    CHECK(std::abs(e.s) < 1e-12);
  }
  CHECK_THROWS_AS(h_mul(sp, {{1}, 0}, {{0, 1}, 0}), Error);
  CHECK_THROWS_AS(HeisenbergSpace::standard(3), Error);
}

TEST_CASE("form is antisymmetric") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (std::size_t dim : {2u, 4u}) {
    auto sp = HeisenbergSpace::standard(dim);
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> x(dim), y(dim);
      for (auto& v : x) v = g(rng);
      for (auto& v : y) v = g(rng);
      CHECK(std::abs(sp.form(x, x)) <= 1e-12);
      CHECK(rel_close(sp.form(x, y), -sp.form(y, x)));
    }
    CHECK(sp.omega_norm == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(HeisenbergSpace::from_matrix(2, {0, 1, 1, 0}), Error);
  auto scaled = HeisenbergSpace::from_matrix(2, {0, 3, -3, 0});
  CHECK(scaled.omega_norm == doctest::Approx(3.0));
}

TEST_CASE("koranyi norms") {
  auto sp = HeisenbergSpace::standard(2);
  CHECK(koranyi_norm(sp, {{3, 4}, 25}, kInf, 1) == doctest::Approx(5));
  CHECK(koranyi_norm(sp, {{3, 4}, 11}, 1, 1) == doctest::Approx(6));
  HPoint a{{1, 0}, 1};
  CHECK(koranyi_norm(sp, h_dilate(2, a), kInf, 1) == doctest::Approx(2 * koranyi_norm(sp, a, kInf, 1)));
  CHECK_THROWS_AS(koranyi_norm(sp, a, 2, 0), Error);
  CHECK_THROWS_AS(koranyi_norm(sp, a, 2, -1), Error);
}

TEST_CASE("koranyi distances are left invariant and homogeneous") {
  auto sp = HeisenbergSpace::standard(2);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> t(0.1, 5.0);
  for (double p : {1.0, 2.0, 3.5, kInf})
    for (double lambda : {0.5, 1.0, 1.42}) {
      for (int i = 0; i < 500; ++i) {
        auto a = random_hpoint(rng, 2), b = random_hpoint(rng, 2), g = random_hpoint(rng, 2);
        double d = koranyi_dist(sp, a, b, p, lambda);
        CHECK(rel_close(koranyi_dist(sp, h_mul(sp, g, a), h_mul(sp, g, b), p, lambda), d));
        double s = t(rng);
        CHECK(rel_close(koranyi_dist(sp, h_dilate(s, a), h_dilate(s, b), p, lambda), s * d));
        CHECK(rel_close(koranyi_dist(sp, b, a, p, lambda), d));
      }
    }
}

TEST_CASE("horizontal length") {
  auto sp = HeisenbergSpace::standard(2);
  std::vector<HPoint> line;
  for (int i = 0; i <= 10; ++i) line.push_back({{i / 10.0, 0}, 0});
  auto r = horizontal_length(sp, line);
  CHECK(r.length == doctest::Approx(1.0));
  CHECK(r.residual == doctest::Approx(0.0));

  // unit square traversed with the vertical coordinate accumulated by the discrete rule
  std::vector<std::array<double, 2>> corners{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  std::vector<HPoint> loop{{{0, 0}, 0}};
  const int steps = 25;
  for (int c = 0; c < 4; ++c)
    for (int i = 1; i <= steps; ++i) {
      double f = static_cast<double>(i) / steps;
      std::vector<double> x{corners[c][0] + f * (corners[c + 1][0] - corners[c][0]),
                            corners[c][1] + f * (corners[c + 1][1] - corners[c][1])};
      const auto& prev = loop.back();
      std::vector<double> dx{x[0] - prev.x[0], x[1] - prev.x[1]};
      double ds = prev.x[0] * dx[1] - prev.x[1] * dx[0];
      loop.push_back({x, prev.s + ds});
    }
  auto sq = horizontal_length(sp, loop);
  CHECK(sq.length == doctest::Approx(4.0));
  CHECK(sq.residual < 1e-12);
  // the accumulated vertical displacement is twice the enclosed area
  CHECK(loop.back().s == doctest::Approx(2.0));

  CHECK_THROWS_AS(horizontal_length(sp, {{{0, 0}, 0}}), Error);
  loop[3].s += 0.5;
  CHECK(horizontal_length(sp, loop).residual == doctest::Approx(0.5));
}

TEST_CASE("quasi-triangle constants") {
  auto l2 = MetricSpace::lp(3, 2);
  CHECK(quasi_constant_estimate(l2, ball_sampler(l2), 10000, 3) == doctest::Approx(1.0).epsilon(1e-9));
  auto tri = MetricSpace::finite(make_finite_matrix({{0, 1, 1.5}, {1, 0, 1}, {1.5, 1, 0}}));
  CHECK(quasi_constant_estimate(tri, ball_sampler(tri), 1000, 3) <= 1 + 1e-9);
  auto heis = MetricSpace::heisenberg(HeisenbergSpace::standard(2), kInf, 1);
  double c = quasi_constant_estimate(heis, ball_sampler(heis), 10000, 3);
  CHECK(c >= 1 - 1e-9);
  MESSAGE("Koranyi p=inf, lambda=1 quasi-triangle estimate: " << c);
  CHECK(quasi_constant_estimate(heis, ball_sampler(heis), 10000, 3) == c);
  CHECK(heis.quasi_constant() >= 1);
  CHECK_THROWS_AS(quasi_constant_estimate(l2, ball_sampler(l2), 0, 3), Error);
  auto one = MetricSpace::finite(make_finite_matrix({{0}}));
  CHECK_THROWS_AS(quasi_constant_estimate(one, ball_sampler(one), 100, 3), Error);
}

TEST_CASE("product spaces satisfy the triangle inequality") {
  auto prod = MetricSpace::product({MetricSpace::lp(2, 1), MetricSpace::lp(1, 2), MetricSpace::lp(2, kInf)}, 3);
  auto sample = ball_sampler(prod);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10000; ++i) {
    auto a = sample(rng), b = sample(rng), c = sample(rng);
    CHECK(prod.distance(a, b) <= prod.distance(a, c) + prod.distance(c, b) + 1e-12);
  }
}

TEST_CASE("ball samplers") {
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    auto space = MetricSpace::lp(2, p);
    auto sample = ball_sampler(space);
    std::mt19937_64 rng(17);
    int inner = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      auto x = sample(rng);
      CHECK(lp_norm(x, p) <= 1 + 1e-12);
      inner += lp_norm(x, p) <= 0.5;
    }
    // volume of the half ball is a quarter of the unit ball in the plane
    CHECK(std::abs(inner / static_cast<double>(n) - 0.25) < 0.01);
  }
  auto heis = MetricSpace::heisenberg(HeisenbergSpace::standard(2), 2, 1.5);
  auto hs = ball_sampler(heis, 2.0);
  std::mt19937_64 rng(1);
  Point origin{0, 0, 0};
  for (int i = 0; i < 2000; ++i) CHECK(heis.distance(hs(rng), origin) <= 2 + 1e-12);
}

TEST_CASE("space descriptors") {
  CHECK(parse_space("l2:dim=3").point_size() == 3);
  auto lp = parse_space("lp:p=1.5,dim=4");
  REQUIRE(lp.as<LpSpace>());
  CHECK(lp.as<LpSpace>()->p == 1.5);
  auto h = parse_space("heis:dim=2,metric=koranyi,p=inf,lambda=1");
  REQUIRE(h.as<HeisenbergMetric>());
  CHECK(std::isinf(h.as<HeisenbergMetric>()->p));
  auto prod = parse_space("prod:p=2;l2:dim=2;l2:dim=2");
  CHECK(prod.point_size() == 4);
  CHECK(prod.distance(Point{0, 0, 0, 0}, Point{3, 0, 0, 4}) == doctest::Approx(5));
  CHECK(parse_space("diamond:k=2").finite_size() == 12);
  CHECK(parse_space("tree:bin:h=2").finite_size() == 7);

  const char* path = "test_spaces_graph.json";
  {
    std::ofstream f(path);
    f << R"({"n":4,"edges":[[0,1],[1,2],[2,3]]})";
  }
  auto g = parse_space(std::string("graph:file=") + path);
  CHECK(g.distance(Point{0}, Point{3}) == 3);
  {
    std::ofstream f(path);
    f << R"({"n":3,"d":[[0,1,2],[1,0,1],[2,1,0]]})";
  }
  CHECK(parse_space(std::string("matrix:file=") + path).distance(Point{0}, Point{2}) == 2);
  std::remove(path);

  CHECK_THROWS_AS(parse_space("l7:dim=2"), Error);
  CHECK_THROWS_AS(parse_space("l2:dim=2,q=3"), Error);
  CHECK_THROWS_AS(parse_space("matrix:file=/nonexistent.json"), Error);
  CHECK_THROWS_AS(parse_space("heis:dim=2,lambda=0"), Error);
}
