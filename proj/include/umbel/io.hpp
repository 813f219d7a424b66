#pragma once

#include <json.hpp>
#include <string>

#include "umbel/embeddings.hpp"
#include "umbel/pointwise.hpp"
#include "umbel/search.hpp"

namespace umbel {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "umbel-lab/1";

Json read_json(const std::string& path);

// Non-finite numbers are written as the strings "inf", "-inf" and "nan".
Json number(double x);
double to_number(const Json& j);

Json to_json(const InvariantReport& r);
Json to_json(const CampaignReport& r);
Json to_json(const Distortion& d);
Json to_json(const SearchResult& r);

Json to_json(const TreeMap& f);
// Inverse of to_json(TreeMap); the target is rebuilt from its descriptor.
TreeMap tree_map_from_json(const Json& j);

// "identity", "constant" or "file:<path>".
TreeMap named_tree_map(const std::string& name, const TreeSpec& spec);

Json to_json(const FiniteMatrix& m);
FiniteMatrix finite_matrix_from_json(const Json& j);

// {"tree", "target": {"n", "d"}, "invariant", "p", "free_height"?, "pins"?, "j_min"?}
// pins entries are "free", "parent" or a target index.
SearchProblem search_problem_from_json(const Json& j);
Json to_json(const SearchProblem& p);

// Rows t = 0, 1, ..., T with columns t, rho, omega.
std::string moduli_csv(const Moduli& m, int T);

void append_jsonl(const std::string& path, const Json& j);

}  // namespace umbel
