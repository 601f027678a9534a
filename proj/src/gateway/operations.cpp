#include "ovm/gateway/operations.hpp"

#include "ovm/text.hpp"

namespace ovm::gateway {

Expected<LoadedModel, LoadFailure> load_model(std::string_view text) {
  auto parsed = text::parse_with_source_map(text);
  if (!parsed) {
    LoadFailure failure;
    for (const auto& e : parsed.error()) failure.syntax.push_back(text::format(e));
    return failure;
  }
  Diagnostics diagnostics = well_formed(parsed->model);
  text::attach_locations(diagnostics, parsed->source_map);
  if (has_errors(diagnostics)) return LoadFailure{{}, std::move(diagnostics)};
  return LoadedModel{std::move(parsed->model), std::move(diagnostics)};
}

analysis::Scope analysis_scope(const VariabilityModel& model) {
  return model.has_internal_vps() ? analysis::Scope::full : analysis::Scope::tenant;
}

std::optional<std::pair<std::string, std::vector<std::string>>> parse_bind_flag(std::string_view flag) {
  const auto eq = flag.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == flag.size()) return std::nullopt;
  std::pair<std::string, std::vector<std::string>> out{std::string(flag.substr(0, eq)), {}};
  std::string_view rest = flag.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    auto item = rest.substr(0, comma);
    if (item.empty()) return std::nullopt;
    out.second.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

Expected<workflow::ActivityGraph> transform(const VariabilityModel& model, const workflow::ActivityGraph& graph,
                                            const derivation::DeveloperBinding& binding,
                                            const std::optional<configurator::TenantConfiguration>& cfg) {
  auto derivation = derivation::derive(model, binding);
  if (!derivation) return derivation.error();
  if (auto problems = workflow::validate_workflow(graph, model); !problems.empty()) return problems;
  auto resolved = workflow::resolve_workflow(graph, derivation->customization, derivation->trace);
  if (!resolved || !cfg) return resolved;
  return workflow::apply_configuration(*resolved, *cfg, derivation->customization);
}

}  // namespace ovm::gateway
