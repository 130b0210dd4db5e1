#pragma once

#include "locc/certifier.hpp"
#include "locc/operators.hpp"
#include "locc/pruner.hpp"
#include "locc/tree.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace locc {

using Json = nlohmann::json;

// Parse or schema failure; the message carries a JSON-path-like location.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operator: {"dim": d, "re": [[..]], "im": [[..]]}
Json operator_to_json(const CMat& m);
CMat operator_from_json(const Json& j, const std::string& where);

// Separable operation: {"dims": [..], "outcomes": [{"weight": w, "locals": [op..]}..]}
Json sep_to_json(const SeparableOperation& sep);
SeparableOperation sep_from_json(const Json& j, const Tolerances& tols = {});

// Tree: {"dims": [..], "root": node} with node
// {"party": p|null, "kraus": op|null, "children": [node..]}
Json tree_to_json(const LoccTree& t);
LoccTree tree_from_json(const Json& j);

Json verdict_to_json(const Verdict& v);

enum class Format { Text, JsonOut };
std::string render_verdict(const Verdict& v, Format fmt);

Json removal_record_to_json(const RemovalRecord& r);

Json load_json_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& text);

}  // namespace locc
