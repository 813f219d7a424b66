#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include "umbel/embeddings.hpp"
#include "umbel/io.hpp"
#include "umbel/pointwise.hpp"
#include "umbel/search.hpp"

using namespace umbel;

namespace {

enum Exit { kOk = 0, kViolated = 1, kInvalid = 2, kOverBudget = 3 };

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  double slack = 1e-9;
};

Json envelope(const std::string& command, const Globals& g, Json config) {
  config["seed"] = g.seed;
  config["slack"] = g.slack;
  return Json{{"schema", kSchema}, {"command", command}, {"config", std::move(config)}};
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(g.out);
  require(f.good(), "cannot open " + g.out);
  f << text << '\n';
}

void emit(const Globals& g, const Json& j) { emit(g, j.dump(2)); }

// Deterministic pseudo-random J with values in [1, 2k+2].
ExtensionBound random_bound(std::uint64_t seed, int k) {
  return [seed, k](const TreeVertex& p, const TreeVertex& q) {
    std::uint64_t h = derive_seed(seed, p.size());
    for (int x : p) h = derive_seed(h, static_cast<std::uint64_t>(x));
    h = derive_seed(h, 0x9e37);
    for (int x : q) h = derive_seed(h, static_cast<std::uint64_t>(x));
    return 1 + static_cast<int>(h % static_cast<std::uint64_t>(2 * k + 2));
  };
}

// J(P, Q) = first label of Q beyond P, plus one.
int next_label_bound(const TreeVertex& p, const TreeVertex& q) { return q[p.size()] + 1; }

struct InvariantArgs {
  std::string tree, map = "identity", invariant = "umbel-cotype";
  double p = 2;
  int j_min = 0;
};

int cmd_invariant(const InvariantArgs& a, const Globals& g) {
  auto spec = parse_tree_spec(a.tree);
  auto f = named_tree_map(a.map, spec);
  InvariantOptions opt;
  opt.j_min = a.j_min;
  auto r = report(parse_invariant(a.invariant), f, a.p, opt);
  auto j = envelope("invariant", g,
                    {{"tree", spec.to_string()}, {"map", a.map}, {"invariant", a.invariant}, {"p", a.p}, {"j_min", a.j_min}});
  j["report"] = to_json(r);
  emit(g, j);
  return kOk;
}

struct CertifyArgs {
  std::string space, inequality;
  double exponent = 2, K = 1, C = 1;
  std::size_t samples = 10000, seq_len = 4;
};

int cmd_certify(const CertifyArgs& a, const Globals& g) {
  auto space = parse_space(a.space);
  auto id = parse_inequality(a.inequality);
  InequalityConfig cfg;
  cfg.exponent = a.exponent;
  cfg.K = a.K;
  cfg.C = a.C;
  cfg.slack = g.slack;
  auto sampler = default_tuple_sampler(space, id, a.seq_len);
  auto r = certify(space, id, cfg, sampler, a.samples, g.seed);
  auto j = envelope("certify", g,
                    {{"space", a.space},
                     {"inequality", to_string(id)},
                     {"exponent", a.exponent},
                     {"K", a.K},
                     {"C", a.C},
                     {"samples", a.samples},
                     {"seq_len", a.seq_len}});
  j["report"] = to_json(r);
  emit(g, j);
  return r.violations == 0 ? kOk : kViolated;
}

struct EmbedArgs {
  std::string tree, map = "bourgain", variant = "lp", csv;
  double p = 2;
};

int cmd_embed(const EmbedArgs& a, const Globals& g) {
  auto spec = parse_tree_spec(a.tree);
  std::optional<TreeMap> f;
  if (a.map == "bourgain")
    f.emplace(bourgain_embed(spec, a.p, parse_bourgain_variant(a.variant)));
  else
    f.emplace(named_tree_map(a.map, spec));
  auto j = envelope("embed", g, {{"tree", spec.to_string()}, {"map", a.map}, {"variant", a.variant}, {"p", a.p}});
  j["distortion"] = to_json(distortion(*f));
  int diameter = 2 * spec.height;
  std::string csv = "t,rho,omega\n0,0,0\n";
  if (f->tree().size() > 1) {
    auto m = moduli(*f);
    csv = moduli_csv(m, diameter);
    if (diameter > 1) j["compression_integral"] = number(compression_integral(m.rho, a.p, diameter));
  }
  j["diameter"] = diameter;
  if (a.csv.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(a.csv);
    require(out.good(), "cannot open " + a.csv);
    out << csv;
    j["csv"] = a.csv;
  }
  if (g.out.empty())
    std::cerr << j.dump(2) << '\n';
  else
    emit(g, j);
  return kOk;
}

struct SearchArgs {
  std::string problem, mode = "both", log;
  std::size_t budget = kExhaustiveBudget, restarts = 8, steps = 100;
};

int cmd_search(const SearchArgs& a, const Globals& g) {
  auto pj = read_json(a.problem);
  auto problem = search_problem_from_json(pj);
  require(a.mode == "exhaustive" || a.mode == "local" || a.mode == "both", "mode must be exhaustive, local or both");
  std::string lines;
  auto record = [&](const std::string& mode, const SearchResult& r, Json extra) {
    auto j = envelope("search", g, {{"problem", to_json(problem)}, {"mode", mode}});
    for (auto& [k, v] : extra.items()) j["config"][k] = v;
    j["result"] = to_json(r);
    if (!a.log.empty()) append_jsonl(a.log, j);
    lines += j.dump() + '\n';
  };
  if (a.mode != "local") record("exhaustive", exhaustive_max(problem, a.budget), {{"budget", a.budget}});
  if (a.mode != "exhaustive")
    record("local", local_search_max(problem, a.restarts, a.steps, g.seed),
           {{"restarts", a.restarts}, {"steps", a.steps}});
  lines.pop_back();
  emit(g, lines);
  return kOk;
}

struct LiftArgs {
  std::string tree = "bin:h=3";
  std::size_t instances = 100, max_points = 12;
};

int cmd_lift(const LiftArgs& a, const Globals& g) {
  auto spec = parse_tree_spec(a.tree);
  auto tree = std::make_shared<const Tree>(spec);
  std::size_t upper = 0, identity = 0;
  Json failures = Json::array();
  for (std::size_t i = 0; i < a.instances; ++i) {
    std::uint64_t s = derive_seed(g.seed, i);
    auto o = random_quotient(s, a.max_points);
    std::mt19937_64 rng(derive_seed(s, 1));
    std::uniform_int_distribution<std::size_t> pick(0, o.Y.finite_size() - 1);
    std::vector<Point> pts(tree->size());
    for (auto& pt : pts) pt = {static_cast<double>(pick(rng))};
    TreeMap gmap(tree, o.Y, std::move(pts));
    auto lift = lift_map(gmap, o, o.C, o.K);
    auto chk = verify_lift(gmap, o, lift, o.C, o.K);
    upper += chk.upper_failures;
    identity += chk.identity_failures;
    if (chk.upper_failures + chk.identity_failures > 0) failures.push_back(i);
  }
  auto j = envelope("lift", g, {{"tree", spec.to_string()}, {"instances", a.instances}, {"max_points", a.max_points}});
  j["result"] = {{"upper_failures", upper}, {"identity_failures", identity}, {"failed_instances", failures}};
  emit(g, j);
  return upper + identity == 0 ? kOk : kViolated;
}

struct MorphismArgs {
  int k = 4;
  std::size_t trials = 50;
  std::string bound = "random";
};

int cmd_morphism(const MorphismArgs& a, const Globals& g) {
  require(a.bound == "random" || a.bound == "next-label", "bound must be random or next-label");
  std::size_t runs = a.bound == "random" ? a.trials : 1;
  Json failures = Json::array();
  int max_label = 0;
  for (std::size_t t = 0; t < runs; ++t) {
    ExtensionBound J = a.bound == "random" ? random_bound(derive_seed(g.seed, t), a.k) : ExtensionBound(next_label_bound);
    auto phi = binary_to_increasing(a.k, J);
    for (const auto& [v, img] : phi)
      if (!img.empty()) max_label = std::max(max_label, img.back());
    auto msg = check_morphism(a.k, J, phi);
    if (!msg.empty()) failures.push_back({{"trial", t}, {"failure", msg}});
  }
  auto j = envelope("morphism", g, {{"k", a.k}, {"trials", runs}, {"bound", a.bound}});
  j["result"] = {{"failures", failures}, {"max_label", max_label}};
  emit(g, j);
  return failures.empty() ? kOk : kViolated;
}

struct HeisenbergArgs {
  std::size_t dim = 2, samples = 4000;
  double p = 2, C = 1, metric_p = kInf, lambda = 1;
  std::vector<double> a, b;
};

int cmd_heisenberg(const HeisenbergArgs& a, const Globals& g) {
  auto group = HeisenbergSpace::standard(a.dim);
  auto consts = parallelogram_constants(a.p, a.C);
  auto space = MetricSpace::heisenberg(group, a.metric_p, a.lambda);
  double quasi = quasi_constant_estimate(space, ball_sampler(space), a.samples, g.seed);
  auto j = envelope("heisenberg", g,
                    {{"dim", a.dim},
                     {"p", a.p},
                     {"C", a.C},
                     {"metric_p", number(a.metric_p)},
                     {"lambda", a.lambda},
                     {"samples", a.samples}});
  j["result"] = {{"K", consts.K}, {"lambda", consts.lambda}, {"quasi_constant", quasi}};
  int code = kOk;
  require(a.a.empty() == a.b.empty(), "give both --a and --b or neither");
  if (!a.a.empty()) {
    require(a.a.size() == a.dim + 1 && a.b.size() == a.dim + 1, "points need dim + 1 coordinates");
    j["config"]["a"] = a.a;
    j["config"]["b"] = a.b;
    auto ha = to_hpoint(a.a), hb = to_hpoint(a.b);
    auto chk = check_parallelogram(group, a.p, a.C, ha, hb, g.slack);
    j["result"]["distance"] = koranyi_dist(group, ha, hb, a.metric_p, a.lambda);
    j["result"]["parallelogram"] = {{"holds", chk.holds}, {"lhs", chk.lhs}, {"rhs", chk.rhs}, {"margin", chk.margin}};
    if (!chk.holds) code = kViolated;
  }
  emit(g, j);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree invariants, metric inequalities and embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker cap (0 = all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Write the report here instead of stdout");
  app.add_option("--slack", g.slack, "Numerical slack for inequality checks")->capture_default_str();

  InvariantArgs inv;
  auto* c_inv = app.add_subcommand("invariant", "Evaluate a tree invariant on a map");
  c_inv->add_option("--tree", inv.tree)->required();
  c_inv->add_option("--map", inv.map, "identity, constant or file:<path>")->capture_default_str();
  c_inv->add_option("--invariant", inv.invariant)->capture_default_str();
  c_inv->add_option("--p,--q", inv.p)->capture_default_str();
  c_inv->add_option("--j-min", inv.j_min)->capture_default_str();

  CertifyArgs cert;
  auto* c_cert = app.add_subcommand("certify", "Sample an inequality on a space");
  c_cert->add_option("--space", cert.space)->required();
  c_cert->add_option("--inequality", cert.inequality)->required();
  c_cert->add_option("--p,--q", cert.exponent)->capture_default_str();
  c_cert->add_option("--K", cert.K)->capture_default_str();
  c_cert->add_option("--C", cert.C)->capture_default_str();
  c_cert->add_option("--samples", cert.samples)->capture_default_str();
  c_cert->add_option("--seq-len", cert.seq_len)->capture_default_str();

  EmbedArgs emb;
  auto* c_emb = app.add_subcommand("embed", "Distortion and moduli of a tree embedding");
  c_emb->add_option("--tree", emb.tree)->required();
  c_emb->add_option("--map", emb.map, "bourgain, identity, constant or file:<path>")->capture_default_str();
  c_emb->add_option("--variant", emb.variant, "lp, l1 or linf")->capture_default_str();
  c_emb->add_option("--p", emb.p)->capture_default_str();
  c_emb->add_option("--csv", emb.csv, "Write the moduli CSV here instead of stdout");

  SearchArgs srch;
  auto* c_srch = app.add_subcommand("search", "Maximize an invariant ratio over maps into a finite space");
  c_srch->add_option("--problem", srch.problem)->required();
  c_srch->add_option("--mode", srch.mode, "exhaustive, local or both")->capture_default_str();
  c_srch->add_option("--budget", srch.budget)->capture_default_str();
  c_srch->add_option("--restarts", srch.restarts)->capture_default_str();
  c_srch->add_option("--steps", srch.steps)->capture_default_str();
  c_srch->add_option("--log", srch.log, "Append results to this JSON-lines file");

  LiftArgs lift;
  auto* c_lift = app.add_subcommand("lift", "Lift random tree maps through random finite quotients");
  c_lift->add_option("--tree", lift.tree)->capture_default_str();
  c_lift->add_option("--instances", lift.instances)->capture_default_str();
  c_lift->add_option("--max-points", lift.max_points)->capture_default_str();

  MorphismArgs mor;
  auto* c_mor = app.add_subcommand("morphism", "Build and check binary-to-increasing tree morphisms");
  c_mor->add_option("--k", mor.k)->capture_default_str();
  c_mor->add_option("--trials", mor.trials)->capture_default_str();
  c_mor->add_option("--bound", mor.bound, "random or next-label")->capture_default_str();

  HeisenbergArgs heis;
  auto* c_heis = app.add_subcommand("heisenberg", "Heisenberg constants, quasi-constant and pair checks");
  c_heis->add_option("--dim", heis.dim)->capture_default_str();
  c_heis->add_option("--p", heis.p)->capture_default_str();
  c_heis->add_option("--C", heis.C)->capture_default_str();
  c_heis->add_option("--metric-p", heis.metric_p)->capture_default_str();
  c_heis->add_option("--lambda", heis.lambda)->capture_default_str();
  c_heis->add_option("--samples", heis.samples)->capture_default_str();
  c_heis->add_option("--a", heis.a, "Point (x..., s)")->delimiter(',');
  c_heis->add_option("--b", heis.b, "Point (x..., s)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    set_thread_count(g.threads);
    if (*c_inv) return cmd_invariant(inv, g);
    if (*c_cert) return cmd_certify(cert, g);
    if (*c_emb) return cmd_embed(emb, g);
    if (*c_srch) return cmd_search(srch, g);
    if (*c_lift) return cmd_lift(lift, g);
    if (*c_mor) return cmd_morphism(mor, g);
    if (*c_heis) return cmd_heisenberg(heis, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Budget ? kOverBudget : kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
