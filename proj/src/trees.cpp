#include "umbel/trees.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace umbel {

TreeSpec TreeSpec::binary(int h) {
  TreeSpec s{TreeKind::Binary, h, 0};
  s.validate();
  return s;
}

TreeSpec TreeSpec::increasing(int h, int b) {
  TreeSpec s{TreeKind::Increasing, h, b};
  s.validate();
  return s;
}

void TreeSpec::validate() const {
  require(height >= 0, "tree height must be nonnegative");
  if (kind == TreeKind::Binary) {
    require(height <= 24, "binary tree too tall");
  } else {
    require(branching >= 1, "branching must be positive");
    require(branching >= height, "increasing tree needs b >= h");
  }
}

std::size_t TreeSpec::vertex_count() const {
  if (kind == TreeKind::Binary) return (std::size_t{2} << height) - 1;
  std::size_t total = 0, binom = 1;  // C(b, l)
  for (int l = 0; l <= height; ++l) {
    total += binom;
    binom = binom * static_cast<std::size_t>(branching - l) / static_cast<std::size_t>(l + 1);
  }
  return total;
}

std::string TreeSpec::to_string() const {
  std::ostringstream os;
  if (kind == TreeKind::Binary)
    os << "bin:h=" << height;
  else
    os << "inc:h=" << height << ",b=" << branching;
  return os.str();
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body, const std::string& what) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    require(eq != std::string::npos && eq > 0, "malformed " + what + ": " + body);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

int parse_int(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (...) {
    fail("bad integer for " + what + ": " + s);
  }
  require(pos == s.size(), "bad integer for " + what + ": " + s);
  return v;
}

void extend_level(const TreeSpec& spec, const std::vector<TreeVertex>& prev, std::vector<TreeVertex>& out) {
  for (const auto& v : prev) {
    if (spec.kind == TreeKind::Binary) {
      for (int sgn : {-1, 1}) {
        auto c = v;
        c.push_back(sgn);
        out.push_back(std::move(c));
      }
    } else {
      int start = v.empty() ? 1 : v.back() + 1;
      for (int j = start; j <= spec.branching; ++j) {
        auto c = v;
        c.push_back(j);
        out.push_back(std::move(c));
      }
    }
  }
}

}  // namespace

TreeSpec parse_tree_spec(const std::string& text) {
  auto colon = text.find(':');
  require(colon != std::string::npos, "malformed tree spec: " + text);
  std::string kind = text.substr(0, colon);
  auto kv = parse_kv(text.substr(colon + 1), "tree spec");
  require(kv.count("h"), "tree spec needs h: " + text);
  int h = parse_int(kv["h"], "h");
  if (kind == "bin") {
    require(kv.size() == 1, "unexpected key in tree spec: " + text);
    return TreeSpec::binary(h);
  }
  if (kind == "inc") {
    require(kv.count("b") && kv.size() == 2, "increasing tree spec needs h and b: " + text);
    return TreeSpec::increasing(h, parse_int(kv["b"], "b"));
  }
  fail("unknown tree kind: " + kind);
}

std::vector<TreeVertex> vertices(const TreeSpec& spec) {
  spec.validate();
  std::vector<TreeVertex> all{TreeVertex{}};
  std::vector<TreeVertex> cur{TreeVertex{}};
  for (int h = 1; h <= spec.height; ++h) {
    std::vector<TreeVertex> next;
    extend_level(spec, cur, next);
    all.insert(all.end(), next.begin(), next.end());
    cur = std::move(next);
  }
  return all;
}

int common_prefix(const TreeVertex& u, const TreeVertex& v) {
  std::size_t n = std::min(u.size(), v.size()), i = 0;
  while (i < n && u[i] == v[i]) ++i;
  return static_cast<int>(i);
}

int tree_distance(const TreeVertex& u, const TreeVertex& v) {
  return static_cast<int>(u.size() + v.size()) - 2 * common_prefix(u, v);
}

std::vector<std::pair<TreeVertex, TreeVertex>> level_edges(const TreeSpec& spec, int level) {
  require(level >= 1 && level <= spec.height, "edge level out of range");
  std::vector<std::pair<TreeVertex, TreeVertex>> out;
  for (auto& v : vertices(spec)) {
    if (static_cast<int>(v.size()) != level) continue;
    TreeVertex parent(v.begin(), v.end() - 1);
    out.emplace_back(std::move(parent), v);
  }
  return out;
}

Tree::Tree(const TreeSpec& spec) : spec_(spec), verts_(vertices(spec)) {
  parent_.assign(verts_.size(), 0);
  children_.resize(verts_.size());
  level_start_.assign(static_cast<std::size_t>(spec.height) + 2, verts_.size());
  for (std::size_t i = 0; i < verts_.size(); ++i) {
    index_.emplace(verts_[i], i);
    auto d = verts_[i].size();
    if (level_start_[d] == verts_.size()) level_start_[d] = i;
  }
  level_start_[static_cast<std::size_t>(spec.height) + 1] = verts_.size();
  for (std::size_t i = 1; i < verts_.size(); ++i) {
    TreeVertex p(verts_[i].begin(), verts_[i].end() - 1);
    parent_[i] = index_.at(p);
    children_[parent_[i]].push_back(i);
  }
}

std::size_t Tree::index_of(const TreeVertex& v) const {
  auto it = index_.find(v);
  require(it != index_.end(), "vertex not in tree");
  return it->second;
}

bool Tree::contains(const TreeVertex& v) const { return index_.count(v) > 0; }

std::pair<std::size_t, std::size_t> Tree::level(int h) const {
  require(h >= 0 && h <= spec_.height, "level out of range");
  return {level_start_[h], level_start_[h + 1]};
}

std::pair<std::size_t, std::size_t> Tree::descendants(std::size_t v, int h) const {
  const auto& pre = verts_[v];
  int d = static_cast<int>(pre.size());
  require(h >= d, "descendant height above vertex");
  auto [lo, hi] = level(h);
  auto cmp_prefix = [&](std::size_t i) {
    // -1 / 0 / +1 comparing the first d labels of vertex i against pre
    const auto& w = verts_[i];
    for (int j = 0; j < d; ++j) {
      if (w[j] != pre[j]) return w[j] < pre[j] ? -1 : 1;
    }
    return 0;
  };
  std::size_t a = lo, b = hi;
  while (a < b) {
    std::size_t m = (a + b) / 2;
    if (cmp_prefix(m) < 0) a = m + 1; else b = m;
  }
  std::size_t first = a;
  b = hi;
  while (a < b) {
    std::size_t m = (a + b) / 2;
    if (cmp_prefix(m) <= 0) a = m + 1; else b = m;
  }
  return {first, a};
}

GraphSpace make_graph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges, std::size_t cap) {
  require(n >= 1, "graph needs a vertex");
  require(n <= cap, "graph exceeds vertex cap");
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [u, v] : edges) {
    require(u < n && v < n, "edge endpoint out of range");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  GraphSpace g;
  g.n = n;
  g.edges = std::move(edges);
  g.dist.assign(n * n, -1.0);
  parallel_for(n, [&](std::size_t s) {
    double* row = &g.dist[s * n];
    std::deque<std::size_t> queue{s};
    row[s] = 0;
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      for (auto w : adj[u]) {
        if (row[w] < 0) {
          row[w] = row[u] + 1;
          queue.push_back(w);
        }
      }
    }
  });
  for (double d : g.dist) require(d >= 0, "graph is disconnected");
  return g;
}

namespace {

// Replaces every edge (a,b) by the gadget produced by `gadget`, which appends new vertices and edges.
template <class Gadget>
GraphSpace replace_edges(int k, std::size_t cap, Gadget gadget) {
  require(k >= 0, "graph depth must be nonnegative");
  std::size_t n = 2;
  std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}};
  for (int i = 0; i < k; ++i) {
    std::vector<std::pair<std::size_t, std::size_t>> next;
    for (auto [a, b] : edges) gadget(a, b, n, next);
    edges = std::move(next);
    require(n <= cap, "graph exceeds vertex cap");
  }
  return make_graph(n, std::move(edges), cap);
}

}  // namespace

GraphSpace diamond_graph(int k, std::size_t cap) {
  return replace_edges(k, cap, [](std::size_t a, std::size_t b, std::size_t& n, auto& out) {
    std::size_t u = n++, v = n++;
    out.insert(out.end(), {{a, u}, {u, b}, {a, v}, {v, b}});
  });
}

GraphSpace laakso_graph(int k, std::size_t cap) {
  return replace_edges(k, cap, [](std::size_t a, std::size_t b, std::size_t& n, auto& out) {
    std::size_t m1 = n++, u = n++, v = n++, m2 = n++;
    out.insert(out.end(), {{a, m1}, {m1, u}, {m1, v}, {u, m2}, {v, m2}, {m2, b}});
  });
}

namespace {

void build_morphism(const TreeVertex& image, const TreeVertex& eps, int k, int r, const ExtensionBound& J,
                    std::map<TreeVertex, TreeVertex>& phi) {
  phi[eps] = image;
  if (k == 0) return;
  auto plus = eps;
  plus.push_back(1);
  auto plus_image = image;
  plus_image.push_back(r);
  build_morphism(plus_image, plus, k - 1, r + 1, J, phi);

  int j0 = r;
  for (auto it = phi.lower_bound(plus); it != phi.end(); ++it) {
    if (common_prefix(it->first, plus) < static_cast<int>(plus.size())) break;
    j0 = std::max(j0, J(image, it->second));
  }
  auto minus = eps;
  minus.push_back(-1);
  auto minus_image = image;
  minus_image.push_back(j0);
  build_morphism(minus_image, minus, k - 1, j0 + 1, J, phi);
}

}  // namespace

std::map<TreeVertex, TreeVertex> binary_to_increasing(int k, const ExtensionBound& J) {
  require(k >= 0, "morphism height must be nonnegative");
  std::map<TreeVertex, TreeVertex> phi;
  build_morphism({}, {}, k, 1, J, phi);
  return phi;
}

std::string check_morphism(int k, const ExtensionBound& J, const std::map<TreeVertex, TreeVertex>& phi) {
  auto show = [](const TreeVertex& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ")";
    return os.str();
  };
  auto all = vertices(TreeSpec::binary(k));
  if (phi.size() != all.size()) return "domain size mismatch";
  for (const auto& e : all) {
    auto it = phi.find(e);
    if (it == phi.end()) return "missing vertex " + show(e);
    const auto& img = it->second;
    if (img.size() != e.size()) return "height not preserved at " + show(e);
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (img[i] < 1 || (i > 0 && img[i] <= img[i - 1])) return "image not increasing at " + show(e);
    }
    if (!e.empty()) {
      TreeVertex parent(e.begin(), e.end() - 1);
      const auto& pimg = phi.at(parent);
      if (common_prefix(pimg, img) != static_cast<int>(pimg.size())) return "extension not preserved at " + show(e);
    }
  }
  // For each eps and each (eps,1,delta) there must be one label j' >= J(phi(eps), phi(eps,1,delta))
  // shared by every phi(eps,-1,delta').
  for (const auto& e : all) {
    if (static_cast<int>(e.size()) >= k) continue;
    const auto& pimg = phi.at(e);
    auto minus = e;
    minus.push_back(-1);
    auto plus = e;
    plus.push_back(1);
    int jprime = phi.at(minus).back();
    for (const auto& [v, img] : phi) {
      if (v.size() > e.size() && common_prefix(v, minus) == static_cast<int>(minus.size())) {
        if (img[pimg.size()] != jprime) return "branch label not shared below " + show(minus);
      }
      if (v.size() > e.size() && common_prefix(v, plus) == static_cast<int>(plus.size())) {
        if (jprime < J(pimg, img)) return "branch label below J at " + show(v);
      }
    }
  }
  return {};
}

}  // namespace umbel
