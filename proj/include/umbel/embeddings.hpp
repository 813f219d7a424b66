#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "umbel/invariants.hpp"

namespace umbel {

enum class BourgainVariant { Lp, L1, Linf };

BourgainVariant parse_bourgain_variant(const std::string& name);  // "lp", "l1", "linf"

// f(n_1..n_j) = sum_{i=0}^{j} c(j-i+1) e_{Phi(n_1..n_i)} with one standard basis vector per
// vertex, where c(m) = m^{1/q} (q conjugate to p) for the lp variant, 1 for l1 and m for linf.
TreeMap bourgain_embed(const TreeSpec& spec, double p, BourgainVariant variant = BourgainVariant::Lp);

// Phi(v) = 2h + position of v in the vertex enumeration; coordinate index = Phi(v) - 2h.
std::size_t bourgain_label(const Tree& tree, std::size_t v);

struct Distortion {
  double lip = 0.0;
  double colip = 0.0;
  double dist = 0.0;
};
Distortion distortion(const TreeMap& f);

struct ModulusCurve {
  enum class Interpolation { Step, Linear };
  std::vector<double> t;  // increasing breakpoints
  std::vector<double> v;  // value at each breakpoint
  Interpolation interpolation = Interpolation::Step;

  // Step curves are right-continuous; linear curves interpolate. Both are 0 left of the first
  // breakpoint and constant right of the last.
  double operator()(double x) const;
  void validate() const;

  static ModulusCurve identity(double T);
};

struct Moduli {
  ModulusCurve rho;
  ModulusCurve omega;
};

// Step curves on the attained tree distances, regularized to nondecreasing envelopes.
Moduli moduli(const TreeMap& f);

// Integral over [1, T] of (rho(t)/t)^p dt/t.
double compression_integral(const ModulusCurve& rho, double p, double T);

struct QuotientOracle {
  MetricSpace X = MetricSpace::lp(2, 2);
  std::vector<Point> Z;
  MetricSpace Y = MetricSpace::lp(2, 2);
  std::vector<Point> fZ;  // f(Z[i])
  double L = 1.0;
  double A = 0.0;
  double C = 1.0;
  double K = 0.0;
};

// Checks that every y in ys lies within K of f(Z) and that every ball B_Y(f(x), r/C) is covered
// by f(B_X(x, r) ∩ Z)^K, i.e. min{d_X(x,z) : d_Y(f(z), y) <= K} <= C d_Y(f(x), y).
// Returns an empty string on success.
std::string validate_quotient(const QuotientOracle& o, const std::vector<Point>& ys);

struct Lift {
  std::vector<std::size_t> z_index;  // per tree vertex
  TreeMap h;
};

Lift lift_map(const TreeMap& g, const QuotientOracle& o, double C, double K);

struct LiftCheck {
  std::size_t upper_failures = 0;  // edges with d_X(h(u),h(v)) > C d_Y(g(u),g(v)) + CK
  std::size_t identity_failures = 0;  // vertices with d_Y(f(h(v)), g(v)) > K
};
LiftCheck verify_lift(const TreeMap& g, const QuotientOracle& o, const Lift& lift, double C, double K);

// Random planar instance with at most max_points points in Z and in Y; Y is a finite matrix.
QuotientOracle random_quotient(std::uint64_t seed, std::size_t max_points = 12);

}  // namespace umbel
