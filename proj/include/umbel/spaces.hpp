#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "umbel/common.hpp"
#include "umbel/trees.hpp"

namespace umbel {

struct FiniteMatrix {
  std::size_t n = 0;
  std::vector<double> d;  // n*n, row-major
  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

// Validates symmetry, zero diagonal and the triangle inequality.
FiniteMatrix make_finite_matrix(const std::vector<std::vector<double>>& rows);

struct HeisenbergSpace {
  std::size_t dim = 2;
  std::vector<double> omega;  // dim*dim, antisymmetric; form(x,y) = x^T omega y
  double omega_norm = 1.0;    // operator norm w.r.t. the Euclidean norm

  static HeisenbergSpace standard(std::size_t dim);  // symplectic, dim even
  static HeisenbergSpace from_matrix(std::size_t dim, std::vector<double> omega);
  double form(std::span<const double> x, std::span<const double> y) const;
};

struct HPoint {
  std::vector<double> x;
  double s = 0.0;
  bool operator==(const HPoint&) const = default;
};

HPoint h_mul(const HeisenbergSpace& sp, const HPoint& a, const HPoint& b);
HPoint h_inv(const HPoint& a);
HPoint h_dilate(double t, const HPoint& a);
double koranyi_norm(const HeisenbergSpace& sp, const HPoint& a, double p, double lambda);
double koranyi_dist(const HeisenbergSpace& sp, const HPoint& a, const HPoint& b, double p, double lambda);

// Heisenberg points are stored flat as (x_1..x_d, s).
Point to_point(const HPoint& a);
HPoint to_hpoint(std::span<const double> flat);

struct HorizontalLength {
  double length = 0.0;
  double residual = 0.0;
};
HorizontalLength horizontal_length(const HeisenbergSpace& sp, const std::vector<HPoint>& curve);

struct LpSpace {
  std::size_t dim = 1;
  double p = 2.0;  // may be infinity
};

struct HeisenbergMetric {
  HeisenbergSpace group;
  double p = kInf;
  double lambda = 1.0;
};

class MetricSpace;

struct ProductSpace {
  std::vector<MetricSpace> parts;
  double p = 2.0;
};

struct GraphMetric {
  std::shared_ptr<const GraphSpace> graph;
};

// Path metric of a tree; points are vertex indices.
struct TreeMetric {
  std::shared_ptr<const Tree> tree;
};

class MetricSpace {
 public:
  using Impl = std::variant<FiniteMatrix, LpSpace, GraphMetric, TreeMetric, HeisenbergMetric, ProductSpace>;

  static MetricSpace finite(FiniteMatrix m);
  static MetricSpace lp(std::size_t dim, double p);
  static MetricSpace graph(GraphSpace g);
  static MetricSpace tree(std::shared_ptr<const Tree> t);
  static MetricSpace heisenberg(HeisenbergSpace sp, double p, double lambda);
  static MetricSpace product(std::vector<MetricSpace> parts, double p);

  double distance(std::span<const double> a, std::span<const double> b) const;
  // Number of doubles in one point.
  std::size_t point_size() const;
  // Points are indices 0..n-1 (matrix, graph, tree); 0 otherwise.
  std::size_t finite_size() const;
  bool is_finite() const { return finite_size() > 0; }
  void check_point(std::span<const double> a) const;

  double quasi_constant() const { return quasi_c_; }
  void set_quasi_constant(double c) { quasi_c_ = c; }
  const std::string& descriptor() const { return descriptor_; }
  void set_descriptor(std::string d) { descriptor_ = std::move(d); }

  const Impl& impl() const { return impl_; }
  template <class T>
  const T* as() const { return std::get_if<T>(&impl_); }

 private:
  explicit MetricSpace(Impl impl, std::string descriptor);
  Impl impl_;
  std::string descriptor_;
  double quasi_c_ = 1.0;
};

double lp_norm(std::span<const double> v, double p);

// "l2:dim=3", "l1:dim=2", "linf:dim=2", "lp:p=1.5,dim=4",
// "heis:dim=2,metric=koranyi,p=inf,lambda=1", "graph:file=g.json", "matrix:file=m.json",
// "diamond:k=2", "laakso:k=1", "tree:bin:h=4", "prod:p=2;l2:dim=2;l2:dim=2".
MetricSpace parse_space(const std::string& text);

using PointSampler = std::function<Point(std::mt19937_64&)>;

// Uniform sample from the unit ball of a normed space (rejection from the cube), the Koranyi
// ball of radius 1 for Heisenberg, a uniform index for finite spaces, and a product of the
// component samplers for products.
PointSampler ball_sampler(const MetricSpace& space, double radius = 1.0);

// Largest d(a,b)/(d(a,m)+d(m,b)) over n sampled triples, never below 1.
double quasi_constant_estimate(const MetricSpace& space, const PointSampler& sampler, std::size_t n,
                               std::uint64_t seed);

}  // namespace umbel
