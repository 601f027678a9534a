#include "ovm/gateway/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "ovm/analysis.hpp"
#include "ovm/gateway/operations.hpp"
#include "ovm/gateway/service.hpp"
#include "ovm/json_io.hpp"
#include "ovm/text.hpp"

namespace ovm::gateway {

namespace {

using json::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json read_json(const std::string& path) {
  auto doc = json::parse(read_file(path));
  if (!doc) throw UsageError(path + ": " + doc.error().message);
  return std::move(*doc);
}

void print(std::ostream& err, const std::string& file, const Diagnostics& ds) {
  for (const auto& d : ds) {
    err << file << (d.location ? ":" : ": ") << d << '\n';
  }
}

// Loads a model file; prints diagnostics and returns nullopt on failure.
std::optional<VariabilityModel> load(const std::string& path, std::ostream& err) {
  auto loaded = load_model(read_file(path));
  if (!loaded) {
    for (const auto& line : loaded.error().syntax) err << path << ':' << line << '\n';
    print(err, path, loaded.error().diagnostics);
    return std::nullopt;
  }
  print(err, path, loaded->warnings);
  return std::move(loaded->model);
}

derivation::DeveloperBinding collect_binding(const std::vector<std::string>& flags, const std::string& file) {
  derivation::DeveloperBinding binding;
  if (!file.empty()) {
    auto parsed = json::binding_from_json(read_json(file));
    if (!parsed) throw UsageError(file + ": " + parsed.error().message);
    binding = std::move(*parsed);
  }
  for (const auto& flag : flags) {
    auto choice = parse_bind_flag(flag);
    if (!choice) throw UsageError("--bind expects VP=V[,V...], got '" + flag + "'");
    binding.choices.push_back(std::move(*choice));
  }
  return binding;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orthogonal variability model engine", "ovm"};
  app.require_subcommand(1);

  std::string model_file;
  std::string config_file;
  std::string workflow_file;
  std::string bindings_file;
  std::vector<std::string> binds;
  bool with_trace = false;
  std::size_t cap = analysis::default_cap;
  ServeOptions serve_options;
  long ttl = 3600;

  auto* check = app.add_subcommand("check", "Parse a model and report structural diagnostics");
  check->add_option("file", model_file, "Model file (.ovm)")->required()->check(CLI::ExistingFile);

  auto* derive = app.add_subcommand("derive", "Bind internal variation points and print the customization model");
  derive->add_option("file", model_file, "Model file (.ovm)")->required()->check(CLI::ExistingFile);
  derive->add_option("--bind", binds, "Binding VP=V[,V...] (repeatable)");
  derive->add_option("--bindings", bindings_file, "Bindings document {\"bindings\": {...}}")->check(CLI::ExistingFile);
  derive->add_flag("--trace", with_trace, "Print {\"model\", \"trace\"} JSON instead of DSL");

  auto* validate = app.add_subcommand("validate", "Validate a tenant configuration against a customization model");
  validate->add_option("model", model_file, "Customization model file (.ovm)")->required()->check(CLI::ExistingFile);
  validate->add_option("config", config_file, "Configuration document (.json)")->required()->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Count configurations and list dead variants");
  analyze->add_option("file", model_file, "Model file (.ovm)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--cap", cap, "Largest raw choice space to enumerate");

  auto* transform = app.add_subcommand("transform", "Resolve the variation points of a workflow graph");
  transform->add_option("model", model_file, "Model file (.ovm)")->required()->check(CLI::ExistingFile);
  transform->add_option("workflow", workflow_file, "Workflow graph (.awf)")->required()->check(CLI::ExistingFile);
  transform->add_option("--bind", binds, "Binding VP=V[,V...] (repeatable)");
  transform->add_option("--bindings", bindings_file, "Bindings document")->check(CLI::ExistingFile);
  transform->add_option("--config", config_file, "Tenant configuration to apply")->check(CLI::ExistingFile);

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", serve_options.host, "Listen address");
  serve_cmd->add_option("--port", serve_options.port, "Listen port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--state-dir", serve_options.state_dir, "Snapshot directory");
  serve_cmd->add_option("--session-ttl", ttl, "Idle session lifetime in seconds")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--ui-dir", serve_options.ui_dir, "Static files served under /ui");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "ovm: " << e.what() << "\n\n";
    const CLI::App* scope = &app;
    for (auto* sub : app.get_subcommands()) scope = sub;
    err << scope->help();
    return exit_usage;
  }

  try {
    if (check->parsed()) {
      auto model = load(model_file, err);
      if (!model) return exit_diagnostics;
      out << model->name << ": " << model->vps.size() << " variation points, " << model->variants.size()
          << " variants, " << model->constraints.size() << " constraints\n";
      return exit_ok;
    }

    if (derive->parsed()) {
      auto binding = collect_binding(binds, bindings_file);
      auto model = load(model_file, err);
      if (!model) return exit_diagnostics;
      auto result = derivation::derive(*model, binding);
      if (!result) {
        print(err, model_file, result.error());
        return exit_diagnostics;
      }
      const std::string dsl = text::serialize(result->customization.model);
      if (with_trace)
        out << Json{{"model", dsl}, {"trace", json::to_json(result->trace)}}.dump(2) << '\n';
      else
        out << dsl;
      return exit_ok;
    }

    if (validate->parsed()) {
      auto model = load(model_file, err);
      if (!model) return exit_diagnostics;
      auto cm = derivation::as_customization_model(std::move(*model));
      if (!cm) {
        print(err, model_file, cm.error());
        return exit_diagnostics;
      }
      auto cfg = json::configuration_from_json(read_json(config_file));
      if (!cfg) throw UsageError(config_file + ": " + cfg.error().message);
      auto problems = configurator::validate_configuration(*cm, *cfg);
      out << Json{{"valid", problems.empty()}, {"diagnostics", json::to_json(problems)}}.dump(2) << '\n';
      print(err, config_file, problems);
      return problems.empty() ? exit_ok : exit_diagnostics;
    }

    if (analyze->parsed()) {
      auto model = load(model_file, err);
      if (!model) return exit_diagnostics;
      out << json::to_json(analysis::analyze(*model, cap, analysis_scope(*model))).dump(2) << '\n';
      return exit_ok;
    }

    if (transform->parsed()) {
      auto binding = collect_binding(binds, bindings_file);
      auto model = load(model_file, err);
      if (!model) return exit_diagnostics;
      auto graph = json::graph_from_json(read_json(workflow_file));
      if (!graph) throw UsageError(workflow_file + ": " + graph.error().message);
      std::optional<configurator::TenantConfiguration> cfg;
      if (!config_file.empty()) {
        auto parsed = json::configuration_from_json(read_json(config_file));
        if (!parsed) throw UsageError(config_file + ": " + parsed.error().message);
        cfg = std::move(*parsed);
      }
      auto result = gateway::transform(*model, *graph, binding, cfg);
      if (!result) {
        print(err, workflow_file, result.error());
        return exit_diagnostics;
      }
      out << json::to_json(*result).dump(2) << '\n';
      return exit_ok;
    }

    if (serve_cmd->parsed()) {
      serve_options.session_ttl = std::chrono::seconds(ttl);
      return serve(serve_options, err);
    }
  } catch (const UsageError& e) {
    err << "ovm: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace ovm::gateway
