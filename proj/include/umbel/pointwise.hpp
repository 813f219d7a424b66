#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "umbel/spaces.hpp"

namespace umbel {

enum class InequalityId {
  PUmbel,
  RelaxedPUmbel,
  SuperRelaxedPUmbel,
  QTripod,
  QFork,
  RelaxedQFork,
  PUniformConvexity,
  MidpointCurvature,
  HeisenbergParallelogram
};

std::string to_string(InequalityId id);
// Accepts the names produced by to_string and the short CLI names (tripod, fork, ...).
InequalityId parse_inequality(const std::string& name);
bool is_umbel_family(InequalityId id);

struct InequalityConfig {
  double exponent = 2.0;  // p or q
  double K = 1.0;
  double C = 1.0;  // convexity constant for the parallelogram check
  double slack = 1e-9;
};

// Point tuples: umbel family (w, z, x_1, ..., x_m); tripod and forks (w, x, y, z);
// midpoint curvature (x, y, z, m); uniform convexity (x, y); parallelogram (a, b).
using PointTuple = std::vector<Point>;

// lhs is the side that must not exceed rhs; for inequalities displayed as A >= B this is B.
struct CheckReport {
  bool holds = true;
  double margin = 0.0;  // rhs - lhs
  double lhs = 0.0;
  double rhs = 0.0;
  PointTuple witness;
};

CheckReport check_inequality(InequalityId id, const InequalityConfig& cfg, const PointTuple& points,
                             const MetricSpace& space);

struct ParallelogramConstants {
  double K;
  double lambda;
};
ParallelogramConstants parallelogram_constants(double p, double C);

CheckReport check_parallelogram(const HeisenbergSpace& sp, double p, double C, const HPoint& a, const HPoint& b,
                                double slack = 1e-9);

using TupleSampler = std::function<PointTuple(std::mt19937_64&)>;

// Draws each point from ball_sampler(space); umbel tuples carry seq_len points in xs.
TupleSampler default_tuple_sampler(const MetricSpace& space, InequalityId id, std::size_t seq_len = 4);

struct CampaignReport {
  InequalityId id = InequalityId::QTripod;
  InequalityConfig cfg;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t violations = 0;
  double worst_margin = kInf;
  std::size_t worst_index = 0;
  PointTuple worst_witness;
};

// Samples are generated in fixed chunks, each with its own derived generator, so the result
// does not depend on the number of workers.
CampaignReport certify(const MetricSpace& space, InequalityId id, const InequalityConfig& cfg,
                       const TupleSampler& sampler, std::size_t n, std::uint64_t seed);

// Smallest K in [lo, hi] with no sampled violation, by bisection to relative width rel_width.
double min_feasible_K(const MetricSpace& space, InequalityId id, const InequalityConfig& cfg,
                      const TupleSampler& sampler, std::size_t n, std::uint64_t seed, double lo, double hi,
                      double rel_width = 1e-6);

// Left side of the umbel constant condition; feasible K satisfy umbel_condition(p, c, K) <= 1.
double umbel_condition(double p, double c, double K);
// Least K >= 2c with umbel_condition(p, c, K) <= 1.
double solve_umbel_K(double p, double c);

std::vector<double> alpha_sequence(const MetricSpace& space, const Point& x, const Point& y, const Point& z,
                                   const Point& m, int n);

struct ModulusEstimate {
  double argument = 0.0;
  double value = 0.0;
  std::size_t grid = 0;
  std::size_t configurations = 0;
};

// Searches configurations in the plane of the first two coordinates (the whole line when
// dim = 1): points on the unit sphere at separation exactly eps, over a grid of angles refined
// by golden-section search around the best cell.
ModulusEstimate modulus_delta(const MetricSpace& space, double eps, std::size_t grid = 256);
ModulusEstimate modulus_delta_tilde(const MetricSpace& space, double eps, std::size_t grid = 256);
// Exhaustive over families drawn from the lattice of `grid` points per axis inside the ball.
ModulusEstimate modulus_beta(const MetricSpace& space, double t, std::size_t m, std::size_t grid = 9);

struct RamseyResult {
  std::vector<std::size_t> indices;
  double pair_oscillation = 0.0;
  double w_oscillation = 0.0;
  double z_oscillation = 0.0;
};

// Finds m indices of xs on which d(w,x_i)^p/2^p, d(z,x_i)^p/2 and d(x_i,x_j)^p/K^p each fall in a
// single bucket [r/N, (r+1)/N). Lexicographically first such subset.
RamseyResult ramsey_refine(const MetricSpace& space, const Point& w, const Point& z, const std::vector<Point>& xs,
                           double p, double K, std::size_t N, std::size_t m);

}  // namespace umbel
