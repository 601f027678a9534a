#pragma once

#include <string>

#include <json.hpp>

#include "ovm/analysis.hpp"
#include "ovm/configurator.hpp"
#include "ovm/derivation.hpp"
#include "ovm/result.hpp"
#include "ovm/workflow.hpp"

namespace ovm::json {

using Json = nlohmann::ordered_json;

/// A malformed JSON document (as opposed to model diagnostics).
struct DocumentError {
  std::string message;
};

template <typename T>
using Parsed = Expected<T, DocumentError>;

Json to_json(const Diagnostic& d);
Json to_json(const Diagnostics& ds);

/// {"bindings": {"VP1": ["V1"], ...}}; a bare object of bindings and a single
/// string instead of a list are accepted too.
Parsed<derivation::DeveloperBinding> binding_from_json(const Json& doc);
Json to_json(const derivation::DeveloperBinding& binding);

Json to_json(const derivation::Effect& effect);
Json to_json(const derivation::DerivationTrace& trace);

/// {"model": "Fig4-derived", "selections": {"CP1": ["V5"]}}
Parsed<configurator::TenantConfiguration> configuration_from_json(const Json& doc);
Json to_json(const configurator::TenantConfiguration& cfg);

/// {"configurations": N|null, "void": bool|null, "dead": [...], "mode": "exact"|"cap-exceeded"}
Json to_json(const analysis::Report& report);

/// {"mode", "conflict", "decisions": [{"cp","variant","value","forced"}], "groups": [{"cp","min","max","selected"}]}
Json session_state(const configurator::ConfiguratorSession& session);
Parsed<configurator::Decision> decision_from_json(const Json& value);

Parsed<workflow::ActivityGraph> graph_from_json(const Json& doc);
Json to_json(const workflow::ActivityGraph& graph);

/// Parses text, reporting syntax errors as strings.
Parsed<Json> parse(const std::string& text);

}  // namespace ovm::json
