#include "umbel/spaces.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

namespace umbel {

FiniteMatrix make_finite_matrix(const std::vector<std::vector<double>>& rows) {
  FiniteMatrix m;
  m.n = rows.size();
  require(m.n >= 1, "matrix needs at least one point");
  m.d.resize(m.n * m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    require(rows[i].size() == m.n, "matrix must be square");
    for (std::size_t j = 0; j < m.n; ++j) {
      double v = rows[i][j];
      require(std::isfinite(v) && v >= 0, "matrix entries must be finite and nonnegative");
      m.d[i * m.n + j] = v;
    }
  }
  for (std::size_t i = 0; i < m.n; ++i) {
    require(m.at(i, i) == 0, "matrix diagonal must vanish");
    for (std::size_t j = 0; j < m.n; ++j) {
      require(approx_equal(m.at(i, j), m.at(j, i)), "matrix must be symmetric");
      for (std::size_t k = 0; k < m.n; ++k)
        require(approx_le(m.at(i, j), m.at(i, k) + m.at(k, j)), "matrix violates the triangle inequality");
    }
  }
  return m;
}

HeisenbergSpace HeisenbergSpace::standard(std::size_t dim) {
  require(dim >= 2 && dim % 2 == 0, "standard symplectic form needs even dimension");
  std::vector<double> om(dim * dim, 0.0);
  std::size_t h = dim / 2;
  for (std::size_t i = 0; i < h; ++i) {
    om[i * dim + (i + h)] = 1.0;
    om[(i + h) * dim + i] = -1.0;
  }
  return from_matrix(dim, std::move(om));
}

HeisenbergSpace HeisenbergSpace::from_matrix(std::size_t dim, std::vector<double> omega) {
  require(dim >= 1 && omega.size() == dim * dim, "form matrix has wrong size");
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      require(approx_equal(omega[i * dim + j], -omega[j * dim + i]), "form matrix must be antisymmetric");
  HeisenbergSpace sp;
  sp.dim = dim;
  sp.omega = std::move(omega);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      sp.omega.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  sp.omega_norm = svd.singularValues()(0);
  return sp;
}

double HeisenbergSpace::form(std::span<const double> x, std::span<const double> y) const {
  require(x.size() == dim && y.size() == dim, "horizontal dimension mismatch");
  double acc = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < dim; ++j) row += omega[i * dim + j] * y[j];
    acc += x[i] * row;
  }
  return acc;
}

HPoint h_mul(const HeisenbergSpace& sp, const HPoint& a, const HPoint& b) {
  require(a.x.size() == sp.dim && b.x.size() == sp.dim, "horizontal dimension mismatch");
  HPoint c;
  c.x.resize(sp.dim);
  for (std::size_t i = 0; i < sp.dim; ++i) c.x[i] = a.x[i] + b.x[i];
  c.s = a.s + b.s + sp.form(a.x, b.x);
  return c;
}

HPoint h_inv(const HPoint& a) {
  HPoint c = a;
  for (auto& v : c.x) v = -v;
  c.s = -c.s;
  return c;
}

HPoint h_dilate(double t, const HPoint& a) {
  require(t > 0, "dilation factor must be positive");
  HPoint c = a;
  for (auto& v : c.x) v *= t;
  c.s *= t * t;
  return c;
}

double koranyi_norm(const HeisenbergSpace& sp, const HPoint& a, double p, double lambda) {
  require(lambda > 0, "lambda must be positive");
  require(p >= 1, "Koranyi exponent must be >= 1");
  require(a.x.size() == sp.dim, "horizontal dimension mismatch");
  double h = lp_norm(a.x, 2.0);
  if (std::isinf(p)) return std::max(h, lambda * std::sqrt(std::abs(a.s)));
  return std::pow(std::pow(h, 2 * p) + lambda * std::pow(std::abs(a.s), p), 1.0 / (2 * p));
}

double koranyi_dist(const HeisenbergSpace& sp, const HPoint& a, const HPoint& b, double p, double lambda) {
  return koranyi_norm(sp, h_mul(sp, h_inv(b), a), p, lambda);
}

Point to_point(const HPoint& a) {
  Point v = a.x;
  v.push_back(a.s);
  return v;
}

HPoint to_hpoint(std::span<const double> flat) {
  require(!flat.empty(), "empty Heisenberg point");
  HPoint a;
  a.x.assign(flat.begin(), flat.end() - 1);
  a.s = flat.back();
  return a;
}

HorizontalLength horizontal_length(const HeisenbergSpace& sp, const std::vector<HPoint>& curve) {
  require(curve.size() >= 2, "curve needs at least two samples");
  HorizontalLength out;
  std::vector<double> dx(sp.dim);
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto& a = curve[i];
    const auto& b = curve[i + 1];
    require(a.x.size() == sp.dim && b.x.size() == sp.dim, "horizontal dimension mismatch");
    for (std::size_t j = 0; j < sp.dim; ++j) dx[j] = b.x[j] - a.x[j];
    out.length += lp_norm(dx, 2.0);
    out.residual = std::max(out.residual, std::abs((b.s - a.s) - sp.form(a.x, dx)));
  }
  return out;
}

double lp_norm(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 2.0) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0) return 0;
  double s = 0;
  for (double x : v) s += std::pow(std::abs(x) / m, p);
  return m * std::pow(s, 1.0 / p);
}

MetricSpace::MetricSpace(Impl impl, std::string descriptor) : impl_(std::move(impl)), descriptor_(std::move(descriptor)) {}

MetricSpace MetricSpace::finite(FiniteMatrix m) {
  std::string d = "matrix:n=" + std::to_string(m.n);
  return MetricSpace(std::move(m), d);
}

MetricSpace MetricSpace::lp(std::size_t dim, double p) {
  require(dim >= 1, "dimension must be positive");
  require(p >= 1, "exponent must be >= 1");
  std::ostringstream os;
  if (std::isinf(p))
    os << "linf:dim=" << dim;
  else
    os << "lp:p=" << p << ",dim=" << dim;
  return MetricSpace(LpSpace{dim, p}, os.str());
}

MetricSpace MetricSpace::graph(GraphSpace g) {
  std::string d = "graph:n=" + std::to_string(g.n);
  return MetricSpace(GraphMetric{std::make_shared<const GraphSpace>(std::move(g))}, d);
}

MetricSpace MetricSpace::tree(std::shared_ptr<const Tree> t) {
  std::string d = "tree:" + t->spec().to_string();
  return MetricSpace(TreeMetric{std::move(t)}, d);
}

MetricSpace MetricSpace::heisenberg(HeisenbergSpace sp, double p, double lambda) {
  require(lambda > 0, "lambda must be positive");
  require(p >= 1, "Koranyi exponent must be >= 1");
  std::ostringstream os;
  os << "heis:dim=" << sp.dim << ",metric=koranyi,p=";
  if (std::isinf(p)) os << "inf"; else os << p;
  os << ",lambda=" << lambda;
  MetricSpace m(HeisenbergMetric{std::move(sp), p, lambda}, os.str());
  m.quasi_c_ = quasi_constant_estimate(m, ball_sampler(m), 4000, 1);
  return m;
}

MetricSpace MetricSpace::product(std::vector<MetricSpace> parts, double p) {
  require(!parts.empty(), "product needs components");
  require(p >= 1, "product exponent must be >= 1");
  std::ostringstream os;
  os << "prod:p=";
  if (std::isinf(p)) os << "inf"; else os << p;
  double c = 1.0;
  for (const auto& part : parts) {
    os << ";" << part.descriptor();
    c = std::max(c, part.quasi_constant());
  }
  MetricSpace m(ProductSpace{std::move(parts), p}, os.str());
  m.quasi_c_ = c;
  return m;
}

std::size_t MetricSpace::point_size() const {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LpSpace>) return s.dim;
        else if constexpr (std::is_same_v<T, HeisenbergMetric>) return s.group.dim + 1;
        else if constexpr (std::is_same_v<T, ProductSpace>) {
          std::size_t n = 0;
          for (const auto& part : s.parts) n += part.point_size();
          return n;
        } else return 1;
      },
      impl_);
}

std::size_t MetricSpace::finite_size() const {
  if (auto m = as<FiniteMatrix>()) return m->n;
  if (auto g = as<GraphMetric>()) return g->graph->n;
  if (auto t = as<TreeMetric>()) return t->tree->size();
  return 0;
}

void MetricSpace::check_point(std::span<const double> a) const {
  require(a.size() == point_size(), "point has wrong dimension for " + descriptor_);
  for (double v : a) require(std::isfinite(v), "point has a non-finite coordinate");
  if (std::size_t n = finite_size()) {
    double i = a[0];
    require(i >= 0 && i < static_cast<double>(n) && i == std::floor(i), "point index out of range");
  }
}

double MetricSpace::distance(std::span<const double> a, std::span<const double> b) const {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FiniteMatrix>) {
          return s.at(static_cast<std::size_t>(a[0]), static_cast<std::size_t>(b[0]));
        } else if constexpr (std::is_same_v<T, GraphMetric>) {
          return s.graph->distance(static_cast<std::size_t>(a[0]), static_cast<std::size_t>(b[0]));
        } else if constexpr (std::is_same_v<T, TreeMetric>) {
          return s.tree->distance(static_cast<std::size_t>(a[0]), static_cast<std::size_t>(b[0]));
        } else if constexpr (std::is_same_v<T, LpSpace>) {
          require(a.size() == s.dim && b.size() == s.dim, "point dimension mismatch");
          if (s.p == 2.0) {
            double acc = 0;
            for (std::size_t i = 0; i < s.dim; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
            return std::sqrt(acc);
          }
          std::vector<double> diff(s.dim);
          for (std::size_t i = 0; i < s.dim; ++i) diff[i] = a[i] - b[i];
          return lp_norm(diff, s.p);
        } else if constexpr (std::is_same_v<T, HeisenbergMetric>) {
          require(a.size() == s.group.dim + 1 && b.size() == s.group.dim + 1, "point dimension mismatch");
          return koranyi_dist(s.group, to_hpoint(a), to_hpoint(b), s.p, s.lambda);
        } else {
          std::vector<double> comps;
          std::size_t off = 0;
          for (const auto& part : s.parts) {
            std::size_t k = part.point_size();
            require(off + k <= a.size() && off + k <= b.size(), "point dimension mismatch");
            comps.push_back(part.distance(a.subspan(off, k), b.subspan(off, k)));
            off += k;
          }
          require(off == a.size() && off == b.size(), "point dimension mismatch");
          return lp_norm(comps, s.p);
        }
      },
      impl_);
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body, const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    require(eq != std::string::npos && eq > 0, "malformed space descriptor: " + text);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

double parse_real(const std::string& s, const std::string& what) {
  if (s == "inf") return kInf;
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    fail("bad number for " + what + ": " + s);
  }
  require(pos == s.size(), "bad number for " + what + ": " + s);
  return v;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  double v = parse_real(s, what);
  require(v >= 0 && v == std::floor(v) && std::isfinite(v), "bad count for " + what + ": " + s);
  return static_cast<std::size_t>(v);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail("invalid JSON in " + path + ": " + e.what());
  }
}

void expect_keys(const std::map<std::string, std::string>& kv, std::initializer_list<const char*> keys,
                 const std::string& text) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const char* allowed : keys) ok = ok || k == allowed;
    require(ok, "unknown key '" + k + "' in " + text);
  }
}

}  // namespace

MetricSpace parse_space(const std::string& text) {
  auto colon = text.find(':');
  require(colon != std::string::npos, "malformed space descriptor: " + text);
  std::string kind = text.substr(0, colon);
  std::string body = text.substr(colon + 1);

  if (kind == "prod") {
    std::vector<std::string> pieces;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ';')) pieces.push_back(item);
    require(pieces.size() >= 2, "product needs an exponent and components: " + text);
    auto kv = parse_kv(pieces[0], text);
    expect_keys(kv, {"p"}, text);
    require(kv.count("p"), "product needs p: " + text);
    std::vector<MetricSpace> parts;
    for (std::size_t i = 1; i < pieces.size(); ++i) parts.push_back(parse_space(pieces[i]));
    auto m = MetricSpace::product(std::move(parts), parse_real(kv["p"], "p"));
    m.set_descriptor(text);
    return m;
  }
  if (kind == "tree") {
    auto m = MetricSpace::tree(std::make_shared<const Tree>(parse_tree_spec(body)));
    return m;
  }

  auto kv = parse_kv(body, text);
  MetricSpace out = MetricSpace::lp(1, 2);
  if (kind == "l1" || kind == "l2" || kind == "linf") {
    expect_keys(kv, {"dim"}, text);
    require(kv.count("dim"), "missing dim: " + text);
    double p = kind == "l1" ? 1.0 : kind == "l2" ? 2.0 : kInf;
    out = MetricSpace::lp(parse_size(kv["dim"], "dim"), p);
  } else if (kind == "lp") {
    expect_keys(kv, {"dim", "p"}, text);
    require(kv.count("dim") && kv.count("p"), "lp needs p and dim: " + text);
    out = MetricSpace::lp(parse_size(kv["dim"], "dim"), parse_real(kv["p"], "p"));
  } else if (kind == "heis") {
    expect_keys(kv, {"dim", "metric", "p", "lambda"}, text);
    require(!kv.count("metric") || kv["metric"] == "koranyi", "only Koranyi metrics are supported: " + text);
    std::size_t dim = kv.count("dim") ? parse_size(kv["dim"], "dim") : 2;
    double p = kv.count("p") ? parse_real(kv["p"], "p") : kInf;
    double lambda = kv.count("lambda") ? parse_real(kv["lambda"], "lambda") : 1.0;
    out = MetricSpace::heisenberg(HeisenbergSpace::standard(dim), p, lambda);
  } else if (kind == "matrix") {
    expect_keys(kv, {"file"}, text);
    require(kv.count("file"), "matrix needs file: " + text);
    auto j = read_json_file(kv["file"]);
    std::vector<std::vector<double>> rows;
    try {
      rows = j.at("d").get<std::vector<std::vector<double>>>();
      if (j.contains("n")) require(j.at("n").get<std::size_t>() == rows.size(), "matrix n does not match d");
    } catch (const nlohmann::json::exception& e) {
      fail("bad matrix file " + kv["file"] + ": " + e.what());
    }
    out = MetricSpace::finite(make_finite_matrix(rows));
  } else if (kind == "graph") {
    expect_keys(kv, {"file"}, text);
    require(kv.count("file"), "graph needs file: " + text);
    auto j = read_json_file(kv["file"]);
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    try {
      n = j.at("n").get<std::size_t>();
      for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
      fail("bad graph file " + kv["file"] + ": " + e.what());
    }
    out = MetricSpace::graph(make_graph(n, std::move(edges)));
  } else if (kind == "diamond" || kind == "laakso") {
    expect_keys(kv, {"k"}, text);
    require(kv.count("k"), "missing k: " + text);
    int k = static_cast<int>(parse_size(kv["k"], "k"));
    out = MetricSpace::graph(kind == "diamond" ? diamond_graph(k) : laakso_graph(k));
  } else {
    fail("unknown space kind: " + kind);
  }
  out.set_descriptor(text);
  return out;
}

namespace {

// Uniform point of the unit l_p ball in R^dim: normalized generalized-Gaussian vector with an
// extra exponential coordinate.
Point sample_lp_ball(std::mt19937_64& rng, std::size_t dim, double p) {
  Point v(dim);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  if (std::isinf(p)) {
    for (auto& x : v) x = unif(rng);
    return v;
  }
  std::gamma_distribution<double> gamma(1.0 / p, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  double acc = 0;
  for (auto& x : v) {
    double g = gamma(rng);
    x = (coin(rng) ? 1.0 : -1.0) * std::pow(g, 1.0 / p);
    acc += g;
  }
  double scale = std::pow(acc + expo(rng), 1.0 / p);
  for (auto& x : v) x /= scale;
  return v;
}

}  // namespace

PointSampler ball_sampler(const MetricSpace& space, double radius) {
  require(radius > 0, "sampling radius must be positive");
  if (std::size_t n = space.finite_size()) {
    return [n](std::mt19937_64& rng) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      return Point{static_cast<double>(pick(rng))};
    };
  }
  if (auto lp = space.as<LpSpace>()) {
    std::size_t dim = lp->dim;
    double p = lp->p;
    return [dim, p, radius](std::mt19937_64& rng) {
      auto v = sample_lp_ball(rng, dim, p);
      for (auto& x : v) x *= radius;
      return v;
    };
  }
  if (auto h = space.as<HeisenbergMetric>()) {
    HeisenbergMetric hm = *h;
    return [hm, radius](std::mt19937_64& rng) {
      double smax = std::isinf(hm.p) ? 1.0 / (hm.lambda * hm.lambda) : std::pow(hm.lambda, -1.0 / hm.p);
      std::uniform_real_distribution<double> vert(-smax, smax);
      for (;;) {
        HPoint a{sample_lp_ball(rng, hm.group.dim, 2.0), vert(rng)};
        if (koranyi_norm(hm.group, a, hm.p, hm.lambda) <= 1.0) return to_point(h_dilate(radius, a));
      }
    };
  }
  auto prod = space.as<ProductSpace>();
  std::vector<PointSampler> parts;
  for (const auto& part : prod->parts) parts.push_back(ball_sampler(part, radius));
  return [parts](std::mt19937_64& rng) {
    Point out;
    for (const auto& s : parts) {
      auto v = s(rng);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  };
}

double quasi_constant_estimate(const MetricSpace& space, const PointSampler& sampler, std::size_t n,
                               std::uint64_t seed) {
  require(n >= 1, "need at least one sample");
  constexpr std::size_t kChunk = 1024;
  std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> best(chunks, -1.0);
  parallel_for(chunks, [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(seed, c));
    std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto a = sampler(rng), b = sampler(rng), m = sampler(rng);
      double den = space.distance(a, m) + space.distance(m, b);
      if (den <= kAbsTol) continue;
      best[c] = std::max(best[c], space.distance(a, b) / den);
    }
  });
  double out = *std::max_element(best.begin(), best.end());
  if (out < 0) throw Error(ErrorCode::Validation, "sampler produced only degenerate triples");
  // the triple (a, b, b) always attains 1
  return std::max(out, 1.0);
}

}  // namespace umbel
