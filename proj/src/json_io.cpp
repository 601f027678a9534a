#include "ovm/json_io.hpp"

#include <algorithm>

namespace ovm::json {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

DocumentError bad(std::string message) { return DocumentError{std::move(message)}; }

Json cardinality(Cardinality c) { return Json{{"min", c.min}, {"max", c.max}}; }

Json cause(const std::optional<Constraint>& c) { return c ? Json(describe(*c)) : Json(nullptr); }

// A list of strings, or a single string standing for a one-element list.
Parsed<std::vector<std::string>> string_list(const Json& value, const std::string& what) {
  if (value.is_string()) return std::vector<std::string>{value.get<std::string>()};
  if (!value.is_array()) return bad(what + " must be a list of variant ids");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) return bad(what + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

Json to_json(const Diagnostic& d) {
  Json j{{"code", d.code}, {"severity", std::string(to_string(d.severity))}, {"message", d.message},
         {"subject", d.subject}};
  if (d.location) j["location"] = {{"line", d.location->line}, {"column", d.location->column}, {"length", d.location->length}};
  return j;
}

Json to_json(const Diagnostics& ds) {
  Json out = Json::array();
  for (const auto& d : ds) out.push_back(to_json(d));
  return out;
}

Parsed<derivation::DeveloperBinding> binding_from_json(const Json& doc) {
  if (!doc.is_object()) return bad("bindings document must be an object");
  const Json& map = doc.contains("bindings") ? doc.at("bindings") : doc;
  if (!map.is_object()) return bad("\"bindings\" must be an object");
  derivation::DeveloperBinding binding;
  for (const auto& [vp, chosen] : map.items()) {
    auto list = string_list(chosen, "binding for '" + vp + "'");
    if (!list) return list.error();
    binding.choices.emplace_back(vp, std::move(*list));
  }
  return binding;
}

Json to_json(const derivation::DeveloperBinding& binding) {
  Json map = Json::object();
  for (const auto& [vp, chosen] : binding.choices) map[vp] = chosen;
  return Json{{"bindings", map}};
}

Json to_json(const derivation::Effect& effect) {
  using namespace derivation;
  return std::visit(
      overloaded{
          [](const VariantRemoved& e) { return Json{{"kind", "variant-removed"}, {"variant", e.variant}, {"cause", cause(e.cause)}}; },
          [](const VariantPromoted& e) {
            return Json{{"kind", "variant-promoted"}, {"variant", e.variant}, {"vp", e.vp}, {"cause", cause(e.cause)}};
          },
          [](const CardinalityAdjusted& e) {
            return Json{{"kind", "cardinality-adjusted"}, {"vp", e.vp}, {"before", cardinality(e.before)},
                        {"after", cardinality(e.after)}};
          },
          [](const VpDropped& e) { return Json{{"kind", "vp-dropped"}, {"vp", e.vp}, {"reason", e.reason}}; },
          [](const ConstraintCarried& e) { return Json{{"kind", "constraint-carried"}, {"constraint", describe(e.constraint)}}; },
          [](const ConstraintDiscarded& e) {
            return Json{{"kind", "constraint-discarded"}, {"constraint", describe(e.constraint)}, {"reason", e.reason}};
          },
      },
      effect);
}

Json to_json(const derivation::DerivationTrace& trace) {
  Json out = Json::array();
  for (const auto& e : trace) out.push_back(to_json(e));
  return out;
}

Parsed<configurator::TenantConfiguration> configuration_from_json(const Json& doc) {
  if (!doc.is_object()) return bad("configuration must be an object");
  configurator::TenantConfiguration cfg;
  if (doc.contains("model")) {
    if (!doc.at("model").is_string()) return bad("\"model\" must be a string");
    cfg.model_name = doc.at("model").get<std::string>();
  }
  if (!doc.contains("selections") || !doc.at("selections").is_object())
    return bad("configuration needs a \"selections\" object");
  for (const auto& [cp, chosen] : doc.at("selections").items()) {
    auto list = string_list(chosen, "selection for '" + cp + "'");
    if (!list) return list.error();
    cfg.selections.emplace_back(cp, std::move(*list));
  }
  return cfg;
}

Json to_json(const configurator::TenantConfiguration& cfg) {
  Json selections = Json::object();
  for (const auto& [cp, chosen] : cfg.selections) selections[cp] = chosen;
  return Json{{"model", cfg.model_name}, {"selections", selections}};
}

Json to_json(const analysis::Report& report) {
  if (report.cap_exceeded)
    return Json{{"configurations", nullptr}, {"void", nullptr}, {"dead", nullptr}, {"mode", "cap-exceeded"}};
  return Json{{"configurations", report.configurations}, {"void", report.is_void}, {"dead", report.dead}, {"mode", "exact"}};
}

Json session_state(const configurator::ConfiguratorSession& session) {
  using configurator::Decision;
  Json decisions = Json::array();
  for (const auto& st : session.pairs())
    decisions.push_back(Json{{"cp", st.pair.cp},
                             {"variant", st.pair.variant},
                             {"value", std::string(to_string(st.value))},
                             {"forced", st.forced}});
  Json groups = Json::array();
  for (const auto& vp : session.model().model.vps) {
    if (!vp.group) continue;
    const auto selected = std::count_if(vp.group->members.begin(), vp.group->members.end(), [&](const VariantEdge& e) {
      return session.value(vp.id, e.variant_id) == Decision::selected;
    });
    groups.push_back(Json{{"cp", vp.id}, {"min", vp.group->min}, {"max", vp.group->max}, {"selected", selected}});
  }
  return Json{{"mode", std::string(to_string(session.mode()))},
              {"conflict", session.conflict()},
              {"decisions", decisions},
              {"groups", groups}};
}

Parsed<configurator::Decision> decision_from_json(const Json& value) {
  if (value == "selected" || value == true) return configurator::Decision::selected;
  if (value == "deselected" || value == false) return configurator::Decision::deselected;
  return bad("\"value\" must be \"selected\" or \"deselected\"");
}

Parsed<workflow::ActivityGraph> graph_from_json(const Json& doc) {
  using namespace workflow;
  if (!doc.is_object()) return bad("graph must be an object");
  auto text = [&](const Json& j, const char* key, std::string& out) -> bool {
    if (!j.contains(key) || !j.at(key).is_string()) return false;
    out = j.at(key).get<std::string>();
    return true;
  };
  ActivityGraph g;
  if (!text(doc, "entry", g.entry) || !text(doc, "exit", g.exit)) return bad("graph needs \"entry\" and \"exit\" ids");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) return bad("graph needs a \"nodes\" list");
  for (const auto& jn : doc.at("nodes")) {
    ActivityNode n;
    std::string kind;
    if (!jn.is_object() || !text(jn, "id", n.id) || !text(jn, "kind", kind)) return bad("node needs \"id\" and \"kind\"");
    auto parsed = parse_node_kind(kind);
    if (!parsed) return bad("node '" + n.id + "' has unknown kind '" + kind + "'");
    n.kind = *parsed;
    if (jn.contains("vp") && !text(jn, "vp", n.vp)) return bad("node '" + n.id + "': \"vp\" must be a string");
    if (jn.contains("regions")) {
      if (!jn.at("regions").is_object()) return bad("node '" + n.id + "': \"regions\" must be an object");
      for (const auto& [variant, fragment] : jn.at("regions").items()) {
        auto inner = graph_from_json(fragment);
        if (!inner) return bad("region " + n.id + "/" + variant + ": " + inner.error().message);
        n.regions.push_back(Region{variant, std::move(*inner)});
      }
    }
    g.nodes.push_back(std::move(n));
  }
  if (doc.contains("edges")) {
    if (!doc.at("edges").is_array()) return bad("\"edges\" must be a list");
    for (const auto& je : doc.at("edges")) {
      ActivityEdge e;
      if (!je.is_object() || !text(je, "from", e.from) || !text(je, "to", e.to))
        return bad("edge needs \"from\" and \"to\"");
      std::string value;
      if (je.contains("guard")) {
        if (!text(je, "guard", value)) return bad("edge guard must be a string");
        e.guard = value;
      }
      if (je.contains("variant")) {
        if (!text(je, "variant", value)) return bad("edge variant must be a string");
        e.variant = value;
      }
      g.edges.push_back(std::move(e));
    }
  }
  return g;
}

Json to_json(const workflow::ActivityGraph& graph) {
  Json nodes = Json::array();
  for (const auto& n : graph.nodes) {
    Json jn{{"id", n.id}, {"kind", std::string(workflow::to_string(n.kind))}};
    if (!n.vp.empty()) jn["vp"] = n.vp;
    if (!n.regions.empty()) {
      Json regions = Json::object();
      for (const auto& r : n.regions) regions[r.variant] = to_json(r.fragment);
      jn["regions"] = regions;
    }
    nodes.push_back(std::move(jn));
  }
  Json edges = Json::array();
  for (const auto& e : graph.edges) {
    Json je{{"from", e.from}, {"to", e.to}};
    if (e.guard) je["guard"] = *e.guard;
    if (e.variant) je["variant"] = *e.variant;
    edges.push_back(std::move(je));
  }
  return Json{{"entry", graph.entry}, {"exit", graph.exit}, {"nodes", nodes}, {"edges", edges}};
}

Parsed<Json> parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    return bad(e.what());
  }
}

}  // namespace ovm::json
