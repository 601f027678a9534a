#include "ovm/gateway/service.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "ovm/analysis.hpp"
#include "ovm/gateway/operations.hpp"
#include "ovm/json_io.hpp"
#include "ovm/text.hpp"
#include "ovm/workflow.hpp"

namespace ovm::gateway {

namespace fs = std::filesystem;
using json::Json;

namespace {

Response reply(int status, const Json& body) { return Response{status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message) { return reply(status, Json{{"error", message}}); }

Response diagnostics(int status, const Diagnostics& ds) { return reply(status, Json{{"diagnostics", json::to_json(ds)}}); }

// SES00x codes are session conflicts; everything else is a semantic error.
Response failure(const Diagnostics& ds) {
  const bool session = !ds.empty() && ds.front().code.starts_with("SES");
  return diagnostics(session ? 409 : 422, ds);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::optional<Json> object_body(const std::string& body) {
  auto parsed = json::parse(body.empty() ? "{}" : body);
  if (!parsed || !parsed->is_object()) return std::nullopt;
  return std::move(*parsed);
}

std::optional<std::string> string_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), clock_([] { return std::chrono::steady_clock::now(); }) {}

Response Service::handle(std::string_view method, std::string_view path, const std::string& body) {
  const auto p = split_path(path);
  const auto n = p.size();
  try {
    if (n >= 1 && p[0] == "models") {
      if (n == 1 && method == "POST") return post_model(body);
      if (n == 2 && method == "GET") return get_model(p[1]);
      if (n == 3 && p[2] == "derive" && method == "POST") return derive_model(p[1], body);
      if (n == 3 && p[2] == "analysis" && method == "GET") return analyze_model(p[1]);
      if (n == 4 && p[2] == "workflow" && p[3] == "resolve" && method == "POST") return resolve_workflow(p[1], body);
    }
    if (n >= 1 && p[0] == "sessions") {
      if (n == 1 && method == "POST") return post_session(body);
      if (n == 2 && method == "GET") return get_session(p[1]);
      if (n == 3 && p[2] == "decisions" && method == "POST") return decide(p[1], body);
      if (n == 3 && p[2] == "decisions" && method == "DELETE") return retract(p[1], body);
      if (n == 3 && p[2] == "validate" && method == "POST") return validate(p[1]);
    }
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
  return error(404, "no route for " + std::string(method) + " " + std::string(path));
}

// ---------------------------------------------------------------------------
// Models

std::shared_ptr<const Service::StoredModel> Service::find_model(const std::string& id) const {
  std::shared_lock guard(models_lock_);
  auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second;
}

std::string Service::store(VariabilityModel model, std::optional<std::string> derived_from,
                           derivation::DerivationTrace trace,
                           std::shared_ptr<const derivation::CustomizationModel> customization) {
  auto entry = std::make_shared<StoredModel>();
  entry->canonical = text::serialize(model);
  if (!customization && !model.has_internal_vps()) {
    auto cm = derivation::as_customization_model(model);
    if (cm) customization = std::make_shared<const derivation::CustomizationModel>(std::move(*cm));
  }
  entry->model = std::move(model);
  entry->customization = std::move(customization);
  entry->derived_from = std::move(derived_from);
  entry->trace = std::move(trace);

  std::unique_lock guard(models_lock_);
  entry->id = "m" + std::to_string(next_model_++);
  models_.emplace(entry->id, entry);
  return entry->id;
}

Response Service::post_model(const std::string& body) {
  auto loaded = load_model(body);
  if (!loaded) {
    if (!loaded.error().syntax.empty()) return reply(400, Json{{"error", "syntax"}, {"syntax", loaded.error().syntax}});
    return diagnostics(422, loaded.error().diagnostics);
  }
  if (loaded->model.name.empty()) return error(422, "model name is empty");
  const std::string id = store(std::move(loaded->model), std::nullopt, {}, nullptr);
  return reply(201, Json{{"id", id}, {"warnings", json::to_json(loaded->warnings)}});
}

Response Service::get_model(const std::string& id) {
  auto m = find_model(id);
  if (!m) return error(404, "unknown model '" + id + "'");
  return Response{200, m->canonical, "text/plain"};
}

Response Service::derive_model(const std::string& id, const std::string& body) {
  auto m = find_model(id);
  if (!m) return error(404, "unknown model '" + id + "'");
  auto doc = object_body(body);
  if (!doc) return error(400, "body must be a JSON object");
  auto binding = json::binding_from_json(*doc);
  if (!binding) return error(400, binding.error().message);
  auto result = derivation::derive(m->model, *binding);
  if (!result) return failure(result.error());

  auto cm = std::make_shared<const derivation::CustomizationModel>(result->customization);
  const std::string new_id = store(cm->model, id, result->trace, cm);
  {
    std::unique_lock guard(models_lock_);
    bindings_[new_id] = *binding;
  }
  return reply(200, Json{{"id", new_id}, {"model", text::serialize(cm->model)}, {"trace", json::to_json(result->trace)}});
}

Response Service::analyze_model(const std::string& id) {
  auto m = find_model(id);
  if (!m) return error(404, "unknown model '" + id + "'");
  return reply(200, json::to_json(analysis::analyze(m->model, analysis::default_cap, analysis_scope(m->model))));
}

Response Service::resolve_workflow(const std::string& id, const std::string& body) {
  auto m = find_model(id);
  if (!m) return error(404, "unknown model '" + id + "'");
  auto doc = object_body(body);
  if (!doc || !doc->contains("workflow")) return error(400, "body needs a \"workflow\" graph");
  auto graph = json::graph_from_json(doc->at("workflow"));
  if (!graph) return error(400, graph.error().message);
  std::optional<configurator::TenantConfiguration> cfg;
  if (doc->contains("config")) {
    auto parsed = json::configuration_from_json(doc->at("config"));
    if (!parsed) return error(400, parsed.error().message);
    cfg = std::move(*parsed);
  }

  Expected<workflow::ActivityGraph> out = Diagnostics{};
  if (m->derived_from) {
    // Resolve against the stored derivation of this model.
    auto source = find_model(*m->derived_from);
    if (!source) return error(404, "unknown model '" + *m->derived_from + "'");
    if (auto problems = workflow::validate_workflow(*graph, source->model); !problems.empty()) return failure(problems);
    out = workflow::resolve_workflow(*graph, *m->customization, m->trace);
    if (out && cfg) out = workflow::apply_configuration(*out, *cfg, *m->customization);
  } else {
    derivation::DeveloperBinding binding;
    if (doc->contains("bindings")) {
      auto parsed = json::binding_from_json(*doc);
      if (!parsed) return error(400, parsed.error().message);
      binding = std::move(*parsed);
    }
    out = transform(m->model, *graph, binding, cfg);
  }
  if (!out) return failure(out.error());
  return reply(200, Json{{"workflow", json::to_json(*out)}});
}

// ---------------------------------------------------------------------------
// Sessions

std::string Service::new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream os;
  os << 's' << std::hex << rng() << rng();
  return os.str();
}

void Service::sweep_sessions() {
  const auto limit = std::chrono::duration_cast<std::chrono::steady_clock::duration>(options_.session_ttl).count();
  const auto t = now();
  std::lock_guard guard(sessions_lock_);
  std::erase_if(sessions_, [&](const auto& entry) { return t - entry.second->last_used.load() > limit; });
}

std::shared_ptr<Service::SessionSlot> Service::find_session(const std::string& id) {
  sweep_sessions();
  std::lock_guard guard(sessions_lock_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  it->second->last_used = now();
  return it->second;
}

std::size_t Service::session_count() const {
  std::lock_guard guard(sessions_lock_);
  return sessions_.size();
}

Response Service::post_session(const std::string& body) {
  auto doc = object_body(body);
  if (!doc) return error(400, "body must be a JSON object");
  auto model_id = string_field(*doc, "model");
  if (!model_id) return error(400, "body needs a \"model\" id");
  auto m = find_model(*model_id);
  if (!m) return error(404, "unknown model '" + *model_id + "'");
  if (!m->customization) {
    Diagnostics ds;
    for (const auto& vp : m->model.vps)
      if (!vp.is_external())
        ds.push_back(make_error(codes::unbound_internal_vp,
                                "internal variation point '" + vp.id + "' must be bound before tenants configure",
                                {vp.id}));
    return diagnostics(422, ds);
  }
  auto session = configurator::new_session(m->customization);
  if (!session) return failure(session.error());

  sweep_sessions();
  auto slot = std::make_shared<SessionSlot>();
  slot->session = std::move(*session);
  slot->last_used = now();
  const Json state = json::session_state(slot->session);
  std::string id;
  {
    std::lock_guard guard(sessions_lock_);
    do id = new_session_id();
    while (sessions_.count(id));
    sessions_.emplace(id, slot);
  }
  return reply(201, Json{{"id", id}, {"state", state}});
}

Response Service::get_session(const std::string& id) {
  auto slot = find_session(id);
  if (!slot) return error(404, "unknown session '" + id + "'");
  std::lock_guard guard(slot->lock);
  return reply(200, Json{{"id", id}, {"state", json::session_state(slot->session)}});
}

Response Service::decide(const std::string& id, const std::string& body) {
  auto slot = find_session(id);
  if (!slot) return error(404, "unknown session '" + id + "'");
  auto doc = object_body(body);
  if (!doc) return error(400, "body must be a JSON object");
  auto cp = string_field(*doc, "cp");
  auto variant = string_field(*doc, "variant");
  if (!cp || !variant || !doc->contains("value")) return error(400, "body needs \"cp\", \"variant\" and \"value\"");
  auto value = json::decision_from_json(doc->at("value"));
  if (!value) return error(400, value.error().message);

  std::lock_guard guard(slot->lock);
  auto result = configurator::decide(slot->session, *cp, *variant, *value);
  if (!result) return failure(result.error());
  slot->session = std::move(result->session);
  Json forced = Json::array();
  for (const auto& p : result->report.newly_forced) forced.push_back(Json{{"cp", p.cp}, {"variant", p.variant}});
  return reply(200, Json{{"conflict", result->report.conflict},
                         {"forced", forced},
                         {"mode", std::string(configurator::to_string(result->report.mode))},
                         {"state", json::session_state(slot->session)}});
}

Response Service::retract(const std::string& id, const std::string& body) {
  auto slot = find_session(id);
  if (!slot) return error(404, "unknown session '" + id + "'");
  auto doc = object_body(body);
  if (!doc) return error(400, "body must be a JSON object");
  auto cp = string_field(*doc, "cp");
  auto variant = string_field(*doc, "variant");
  if (!cp || !variant) return error(400, "body needs \"cp\" and \"variant\"");

  std::lock_guard guard(slot->lock);
  auto result = configurator::retract(slot->session, *cp, *variant);
  if (!result) return failure(result.error());
  slot->session = std::move(*result);
  return reply(200, Json{{"state", json::session_state(slot->session)}});
}

Response Service::validate(const std::string& id) {
  auto slot = find_session(id);
  if (!slot) return error(404, "unknown session '" + id + "'");
  std::lock_guard guard(slot->lock);
  auto cfg = configurator::complete(slot->session);
  if (!cfg) return diagnostics(422, cfg.error());
  return reply(200, json::to_json(*cfg));
}

// ---------------------------------------------------------------------------
// Snapshots

void Service::save_snapshot() const {
  if (options_.state_dir.empty()) return;
  const fs::path dir = fs::path(options_.state_dir) / "models";
  fs::create_directories(dir);
  Json index{{"next", 0}, {"models", Json::array()}};
  std::shared_lock guard(models_lock_);
  index["next"] = next_model_;
  for (const auto& [id, m] : models_) {
    std::ofstream(dir / (id + ".ovm")) << m->canonical;
    Json entry{{"id", id}};
    if (m->derived_from) {
      entry["derived_from"] = *m->derived_from;
      entry["bindings"] = json::to_json(bindings_.at(id))["bindings"];
    }
    index["models"].push_back(std::move(entry));
  }
  std::ofstream(fs::path(options_.state_dir) / "index.json") << index.dump(2) << '\n';
}

std::size_t Service::load_snapshot() {
  if (options_.state_dir.empty()) return 0;
  const fs::path index_path = fs::path(options_.state_dir) / "index.json";
  std::ifstream in(index_path);
  if (!in) return 0;
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto index = json::parse(buffer.str());
  if (!index || !index->contains("models")) return 0;

  // Derived entries need their source loaded first; ids sort as strings, so
  // retry until a pass makes no progress.
  std::vector<Json> pending(index->at("models").begin(), index->at("models").end());
  std::size_t loaded = 0;
  for (bool progress = true; progress && !pending.empty();) {
    progress = false;
    std::vector<Json> waiting;
    for (const auto& entry : pending) {
      const std::string id = entry.value("id", "");
      std::ifstream file(fs::path(options_.state_dir) / "models" / (id + ".ovm"));
      std::stringstream text;
      text << file.rdbuf();
      auto model = load_model(text.str());
      if (id.empty() || !model) continue;

      auto stored = std::make_shared<StoredModel>();
      stored->id = id;
      stored->canonical = text::serialize(model->model);
      stored->model = std::move(model->model);
      if (entry.contains("derived_from")) {
        // Re-run the derivation so the trace is available again.
        auto source = find_model(entry.at("derived_from").get<std::string>());
        if (!source) {
          waiting.push_back(entry);
          continue;
        }
        auto binding = json::binding_from_json(Json{{"bindings", entry.at("bindings")}});
        if (!binding) continue;
        auto result = derivation::derive(source->model, *binding);
        if (!result || result->customization.model != stored->model) continue;
        stored->derived_from = source->id;
        stored->trace = result->trace;
        stored->customization = std::make_shared<const derivation::CustomizationModel>(result->customization);
        std::unique_lock guard(models_lock_);
        bindings_[id] = *binding;
      } else if (!stored->model.has_internal_vps()) {
        auto cm = derivation::as_customization_model(stored->model);
        if (cm) stored->customization = std::make_shared<const derivation::CustomizationModel>(std::move(*cm));
      }
      std::unique_lock guard(models_lock_);
      models_[id] = stored;
      ++loaded;
      progress = true;
    }
    pending = std::move(waiting);
  }
  std::unique_lock guard(models_lock_);
  next_model_ = std::max<std::size_t>(next_model_, index->value("next", std::size_t{1}));
  return loaded;
}

}  // namespace ovm::gateway
