#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ovm/analysis.hpp"
#include "ovm/configurator.hpp"
#include "ovm/derivation.hpp"
#include "ovm/model.hpp"
#include "ovm/workflow.hpp"

// Engine entry points shared by the CLI and the HTTP service, so both give
// identical answers for identical inputs.
namespace ovm::gateway {

struct LoadedModel {
  VariabilityModel model;
  Diagnostics warnings;
};

struct LoadFailure {
  std::vector<std::string> syntax;  // formatted parse errors
  Diagnostics diagnostics;          // structural errors (with locations)
};

/// Parses DSL text and checks it is well formed.
Expected<LoadedModel, LoadFailure> load_model(std::string_view text);

/// Models that still have internal VPs are read in full scope, customization
/// models in tenant scope.
analysis::Scope analysis_scope(const VariabilityModel& model);

/// "VP=V1,V2" -> (VP, [V1, V2]); nullopt when malformed.
std::optional<std::pair<std::string, std::vector<std::string>>> parse_bind_flag(std::string_view flag);

/// Derives the customization model, validates the workflow against the source
/// model, resolves it, and applies the configuration when given.
Expected<workflow::ActivityGraph> transform(const VariabilityModel& model, const workflow::ActivityGraph& graph,
                                            const derivation::DeveloperBinding& binding,
                                            const std::optional<configurator::TenantConfiguration>& cfg);

}  // namespace ovm::gateway
