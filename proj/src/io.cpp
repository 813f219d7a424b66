#include "umbel/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace umbel {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail("invalid JSON in " + path + ": " + e.what());
  }
}

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double to_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  require(j.is_string(), "expected a number");
  auto s = j.get<std::string>();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::nan("");
  fail("expected a number, got " + s);
}

Json to_json(const InvariantReport& r) {
  Json j{{"invariant", to_string(r.invariant)}, {"p", number(r.p)},      {"lhs", number(r.lhs)},
         {"rhs", number(r.rhs)},                {"k", r.k},              {"branching", r.branching},
         {"j_min", r.j_min}};
  if (r.ratio) j["ratio"] = number(*r.ratio);
  if (r.ratio_root) j["ratio_root"] = number(*r.ratio_root);
  if (!r.chain.empty()) j["chain"] = r.chain;
  return j;
}

Json to_json(const CampaignReport& r) {
  Json witness = Json::array();
  for (const auto& pt : r.worst_witness) witness.push_back(pt);
  return Json{{"id", to_string(r.id)},
              {"config",
               {{"exponent", number(r.cfg.exponent)},
                {"K", number(r.cfg.K)},
                {"C", number(r.cfg.C)},
                {"slack", r.cfg.slack}}},
              {"n", r.n},
              {"seed", r.seed},
              {"violations", r.violations},
              {"worst_margin", number(r.worst_margin)},
              {"worst_index", r.worst_index},
              {"worst_witness", witness}};
}

Json to_json(const Distortion& d) {
  return Json{{"lip", number(d.lip)}, {"colip", number(d.colip)}, {"distortion", number(d.dist)}};
}

Json to_json(const SearchResult& r) {
  return Json{{"assignment", r.assignment}, {"ratio", number(r.ratio)}, {"evaluated", r.evaluated}};
}

Json to_json(const TreeMap& f) {
  Json assignment = Json::array();
  for (std::size_t v = 0; v < f.tree().size(); ++v) assignment.push_back(Json::array({f.tree().vertex(v), f.at(v)}));
  return Json{{"spec", f.spec().to_string()}, {"target", f.target().descriptor()}, {"assignment", assignment}};
}

TreeMap tree_map_from_json(const Json& j) {
  try {
    auto tree = std::make_shared<const Tree>(parse_tree_spec(j.at("spec").get<std::string>()));
    auto target = parse_space(j.at("target").get<std::string>());
    std::vector<Point> points(tree->size());
    std::vector<bool> seen(tree->size(), false);
    for (const auto& entry : j.at("assignment")) {
      auto v = entry.at(0).get<TreeVertex>();
      require(tree->contains(v), "assignment names a vertex outside the tree");
      std::size_t idx = tree->index_of(v);
      require(!seen[idx], "vertex assigned twice");
      seen[idx] = true;
      points[idx] = entry.at(1).get<Point>();
      target.check_point(points[idx]);
    }
    for (bool s : seen) require(s, "assignment does not cover every vertex");
    return TreeMap(std::move(tree), std::move(target), std::move(points));
  } catch (const Json::exception& e) {
    fail(std::string("bad tree map: ") + e.what());
  }
}

TreeMap named_tree_map(const std::string& name, const TreeSpec& spec) {
  if (name == "identity") return TreeMap::identity(spec);
  if (name == "constant") return TreeMap::constant(spec);
  if (name.rfind("file:", 0) == 0) {
    auto f = tree_map_from_json(read_json(name.substr(5)));
    require(f.spec().to_string() == spec.to_string(), "map file is for tree " + f.spec().to_string());
    return f;
  }
  fail("unknown map: " + name);
}

Json to_json(const FiniteMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.n; ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.n; ++k) row.push_back(m.at(i, k));
    rows.push_back(row);
  }
  return Json{{"n", m.n}, {"d", rows}};
}

FiniteMatrix finite_matrix_from_json(const Json& j) {
  try {
    auto rows = j.at("d").get<std::vector<std::vector<double>>>();
    if (j.contains("n")) require(j.at("n").get<std::size_t>() == rows.size(), "matrix n does not match d");
    return make_finite_matrix(rows);
  } catch (const Json::exception& e) {
    fail(std::string("bad matrix: ") + e.what());
  }
}

SearchProblem search_problem_from_json(const Json& j) {
  SearchProblem pr;
  try {
    pr.spec = parse_tree_spec(j.at("tree").get<std::string>());
    pr.target = finite_matrix_from_json(j.at("target"));
    pr.invariant = parse_invariant(j.at("invariant").get<std::string>());
    pr.p = to_number(j.at("p"));
    pr.options.j_min = j.value("j_min", 0);
    require(!(j.contains("free_height") && j.contains("pins")), "give either free_height or pins");
    if (j.contains("free_height")) pr.pins = pins_up_to_height(pr.spec, j.at("free_height").get<int>());
    if (j.contains("pins")) {
      for (const auto& e : j.at("pins")) {
        Pin pin;
        if (e.is_number_unsigned()) {
          pin.kind = PinKind::Fixed;
          pin.point = e.get<std::size_t>();
        } else {
          auto s = e.get<std::string>();
          require(s == "free" || s == "parent", "pin must be \"free\", \"parent\" or an index");
          pin.kind = s == "free" ? PinKind::Free : PinKind::FollowParent;
        }
        pr.pins.push_back(pin);
      }
    }
  } catch (const Json::exception& e) {
    fail(std::string("bad search problem: ") + e.what());
  }
  pr.validate();
  return pr;
}

Json to_json(const SearchProblem& pr) {
  Json pins = Json::array();
  for (const auto& pin : pr.pins) {
    if (pin.kind == PinKind::Fixed)
      pins.push_back(pin.point);
    else
      pins.push_back(pin.kind == PinKind::Free ? "free" : "parent");
  }
  Json j{{"tree", pr.spec.to_string()},
         {"target", to_json(pr.target)},
         {"invariant", to_string(pr.invariant)},
         {"p", number(pr.p)},
         {"j_min", pr.options.j_min}};
  if (!pr.pins.empty()) j["pins"] = pins;
  return j;
}

std::string moduli_csv(const Moduli& m, int T) {
  std::ostringstream out;
  out.precision(17);
  out << "t,rho,omega\n";
  for (int t = 0; t <= T; ++t) out << t << ',' << m.rho(t) << ',' << m.omega(t) << '\n';
  return out.str();
}

void append_jsonl(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::app);
  require(out.good(), "cannot open " + path);
  out << j.dump() << '\n';
}

}  // namespace umbel
