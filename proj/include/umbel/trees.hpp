#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "umbel/common.hpp"

namespace umbel {

enum class TreeKind { Binary, Increasing };

// Labels are strictly increasing positive integers (increasing kind) or signs -1/+1 (binary kind).
using TreeVertex = std::vector<int>;

struct TreeSpec {
  TreeKind kind = TreeKind::Binary;
  int height = 1;
  int branching = 0;  // increasing kind only

  static TreeSpec binary(int h);
  static TreeSpec increasing(int h, int b);
  void validate() const;
  std::size_t vertex_count() const;
  std::string to_string() const;  // "bin:h=4" / "inc:h=8,b=10"
  bool operator==(const TreeSpec&) const = default;
};

TreeSpec parse_tree_spec(const std::string& text);

std::vector<TreeVertex> vertices(const TreeSpec& spec);
int common_prefix(const TreeVertex& u, const TreeVertex& v);
int tree_distance(const TreeVertex& u, const TreeVertex& v);
std::vector<std::pair<TreeVertex, TreeVertex>> level_edges(const TreeSpec& spec, int level);

// Indexed view of vertices(spec). Vertices of a fixed height form a contiguous block, and the
// descendants of a vertex at a fixed height form a contiguous sub-block of it.
class Tree {
 public:
  explicit Tree(const TreeSpec& spec);

  const TreeSpec& spec() const { return spec_; }
  std::size_t size() const { return verts_.size(); }
  const TreeVertex& vertex(std::size_t i) const { return verts_[i]; }
  int depth(std::size_t i) const { return static_cast<int>(verts_[i].size()); }
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
  std::size_t index_of(const TreeVertex& v) const;
  bool contains(const TreeVertex& v) const;
  int distance(std::size_t a, std::size_t b) const { return tree_distance(verts_[a], verts_[b]); }

  // [first, last) of the vertices at height h
  std::pair<std::size_t, std::size_t> level(int h) const;
  // [first, last) of the descendants of v at height h >= depth(v)
  std::pair<std::size_t, std::size_t> descendants(std::size_t v, int h) const;

 private:
  TreeSpec spec_;
  std::vector<TreeVertex> verts_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> level_start_;
  std::map<TreeVertex, std::size_t> index_;
};

struct GraphSpace {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> dist;  // n*n, row-major

  double distance(std::size_t u, std::size_t v) const { return dist[u * n + v]; }
};

inline constexpr std::size_t kGraphVertexCap = 3000;

// Breadth-first all-pairs shortest paths; throws if the graph is disconnected.
GraphSpace make_graph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges,
                      std::size_t cap = kGraphVertexCap);
GraphSpace diamond_graph(int k, std::size_t cap = kGraphVertexCap);
GraphSpace laakso_graph(int k, std::size_t cap = kGraphVertexCap);

// J(prefix, extension) for extension strictly extending prefix in the image tree.
using ExtensionBound = std::function<int(const TreeVertex&, const TreeVertex&)>;

// Height and extension preserving morphism from the binary tree of height k into increasing
// tuples. The +1 child of an image vertex P takes the least free label r; the -1 child takes
// max(r, j0) where j0 is the largest J(P, image of a +1 descendant).
std::map<TreeVertex, TreeVertex> binary_to_increasing(int k, const ExtensionBound& J);

// Exhaustive check of the morphism property; returns an empty string on success,
// otherwise a description of the first failure.
std::string check_morphism(int k, const ExtensionBound& J, const std::map<TreeVertex, TreeVertex>& phi);

}  // namespace umbel
