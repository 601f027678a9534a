// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Thresholds are fixed here, not tuned.
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "ovm/analysis.hpp"
#include "ovm/configurator.hpp"
#include "ovm/derivation.hpp"
#include "ovm/json_io.hpp"
#include "ovm/text.hpp"
#include "ovm/workflow.hpp"
#include "support/generators.hpp"

using namespace ovm;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGoldenSeconds = 1.0;
constexpr double kOracleSeconds = 300.0;
constexpr int kOracleModels = 200;
constexpr int kMaxVariants = 12;
constexpr int kMaxConstraints = 6;
constexpr int kMutations = 1000;
constexpr int kSessions = 100;
constexpr int kRoundTripModels = 500;

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(OVM_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

VariabilityModel parse_fixture(const std::string& name) {
  auto m = text::parse(fixture(name));
  if (!m) throw std::runtime_error("fixture " + name + " does not parse");
  return *m;
}

derivation::DeveloperBinding bind(std::initializer_list<std::pair<std::string, std::vector<std::string>>> choices) {
  return derivation::DeveloperBinding{{choices.begin(), choices.end()}};
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// The random corpus shared by the oracle, validator, session and replay
// criteria: models and each successful derivation.
struct Corpus {
  std::vector<VariabilityModel> models;
  std::vector<std::pair<std::size_t, derivation::Derivation>> derivations;  // model index, result
  std::vector<std::pair<std::size_t, derivation::DeveloperBinding>> bindings;
};

Corpus& corpus() {
  static Corpus c = [] {
    Corpus out;
    testing::Rng rng(20240611);
    for (int i = 0; i < kOracleModels + 50; ++i) out.models.push_back(testing::random_source_model(rng, kMaxVariants, kMaxConstraints));
    return out;
  }();
  return c;
}

Outcome golden(const char* binding_text, const derivation::DeveloperBinding& binding, const std::string& golden_file,
               const std::function<std::string(const VariabilityModel&)>& shape_check) {
  const auto t0 = Clock::now();
  auto source = parse_fixture("fig4.ovm");
  auto result = derivation::derive(source, binding);
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!result) return {false, std::string("derive failed for ") + binding_text};
  const std::string dsl = text::serialize(result->customization.model);
  std::ostringstream d;
  d << binding_text << ", " << std::fixed << std::setprecision(4) << seconds << " s";
  if (dsl != fixture(golden_file)) return {false, d.str() + ", differs from " + golden_file};
  if (auto problem = shape_check(result->customization.model); !problem.empty()) return {false, d.str() + ", " + problem};
  if (seconds >= kGoldenSeconds) return {false, d.str() + ", too slow"};
  return {true, d.str() + ", byte-identical to " + golden_file};
}

Outcome fig5() {
  return golden("{VP1:V1, VP2:VC3}", bind({{"VP1", {"V1"}}, {"VP2", {"VC3"}}}), "golden/fig5.ovm",
                [](const VariabilityModel& m) -> std::string {
                  const auto dsl = text::serialize(m);
                  if (dsl.find("V3") != std::string::npos) return "V3 still present";
                  const auto* cp1 = m.find_vp("CP1");
                  if (!cp1 || !cp1->group || cp1->group->cardinality() != Cardinality{1, 2} ||
                      cp1->variant_ids() != std::vector<std::string>{"V4", "V5"})
                    return "CP1 group is not {V4,V5} [1..2]";
                  if (!m.find_vp("CP3") || m.find_vp("CP2")) return "CP3/CP2 presence wrong";
                  return {};
                });
}

Outcome fig6() {
  return golden("{VP1:V2, VP2:VC2}", bind({{"VP1", {"V2"}}, {"VP2", {"VC2"}}}), "golden/fig6.ovm",
                [](const VariabilityModel& m) -> std::string {
                  const auto* cp1 = m.find_vp("CP1");
                  if (!cp1 || !cp1->is_mandatory("V5")) return "V5 is not mandatory at CP1";
                  if (!cp1->group || cp1->group->cardinality() != Cardinality{0, 1}) return "CP1 group is not [0..1]";
                  return {};
                });
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  auto& c = corpus();
  std::size_t bindings = 0;
  std::size_t derived = 0;
  std::size_t rejected = 0;
  std::size_t mismatches = 0;
  std::string first;
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    const auto& source = c.models[i];
    for (const auto& binding : testing::all_bindings(source)) {
      ++bindings;
      auto result = derivation::derive(source, binding);
      if (!result) {
        ++rejected;
        const auto& code = result.error().front().code;
        bool ok = code == codes::contradiction || code == codes::group_void;
        if (ok) {
          // The derived model would be void: the source must agree. Any
          // surviving-CP projection is enough to disprove it.
          auto e = analysis::enumerate_configurations(source, analysis::default_cap, analysis::Scope::full);
          std::map<std::string, std::set<std::string>> bound;
          for (const auto& [vp, chosen] : binding.choices) {
            bound[vp] = {chosen.begin(), chosen.end()};
            for (const auto& m : source.find_vp(vp)->mandatory_edges) bound[vp].insert(m.variant_id);
          }
          for (const auto& config : e.configurations) {
            bool match = true;
            for (const auto& [vp, chosen] : bound) {
              const auto& got = config.find(vp)->variants;
              if (std::set<std::string>(got.begin(), got.end()) != chosen) match = false;
            }
            if (match) ok = false;
          }
        }
        if (!ok) {
          ++mismatches;
          if (first.empty()) first = "model " + std::to_string(i) + " rejected with " + code;
        }
        continue;
      }
      ++derived;
      const auto expected = testing::binding_projection(source, binding, result->customization.model);
      const auto actual = analysis::enumerate_configurations(result->customization).configurations;
      if (std::set<analysis::FullConfiguration>(actual.begin(), actual.end()) != expected) {
        ++mismatches;
        if (first.empty()) first = "model " + std::to_string(i) + ": derived set differs from projection";
      }
      c.derivations.emplace_back(i, std::move(*result));
      c.bindings.emplace_back(i, binding);
    }
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  std::ostringstream d;
  d << c.models.size() << " models, " << bindings << " bindings (" << derived << " derived, " << rejected
    << " rejected), " << mismatches << " mismatches, " << std::fixed << std::setprecision(1) << seconds << " s";
  if (!first.empty()) d << "; first: " << first;
  return {mismatches == 0 && static_cast<int>(c.models.size()) >= kOracleModels && seconds < kOracleSeconds, d.str()};
}

// Every per-CP subset of attached variants, when small enough to list.
std::vector<configurator::TenantConfiguration> all_assignments(const derivation::CustomizationModel& cm, std::size_t limit) {
  std::vector<configurator::TenantConfiguration> out{configurator::TenantConfiguration{cm.model.name, {}}};
  for (const auto& vp : cm.model.vps) {
    const auto ids = vp.variant_ids();
    if (out.size() * (std::size_t{1} << ids.size()) > limit) return {};
    std::vector<configurator::TenantConfiguration> next;
    for (const auto& partial : out) {
      for (unsigned mask = 0; mask < (1u << ids.size()); ++mask) {
        auto cfg = partial;
        std::vector<std::string> chosen;
        for (std::size_t i = 0; i < ids.size(); ++i)
          if (mask & (1u << i)) chosen.push_back(ids[i]);
        std::sort(chosen.begin(), chosen.end());
        cfg.selections.emplace_back(vp.id, std::move(chosen));
        next.push_back(std::move(cfg));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::set<std::string> code_set(const Diagnostics& ds) {
  std::set<std::string> out;
  for (const auto& d : ds) out.insert(d.code);
  return out;
}

Outcome validator_agreement() {
  auto& c = corpus();
  testing::Rng rng(77);
  std::size_t models = 0;
  std::size_t checked = 0;
  std::size_t disagreements = 0;
  std::size_t mutated = 0;
  std::string first;
  auto fail = [&](const std::string& why) {
    ++disagreements;
    if (first.empty()) first = why;
  };

  for (const auto& [index, d] : c.derivations) {
    const auto& cm = d.customization;
    const auto valid = testing::valid_configurations(cm);
    std::set<std::vector<std::pair<std::string, std::vector<std::string>>>> valid_set;
    for (const auto& v : valid) valid_set.insert(v.selections);
    ++models;

    for (const auto& cfg : all_assignments(cm, 1u << 14)) {
      ++checked;
      const bool accepted = configurator::validate_configuration(cm, cfg).empty();
      if (accepted != (valid_set.count(cfg.selections) != 0)) fail("model " + std::to_string(index) + ": validator disagrees");
    }

    // Mutations of valid configurations (or of the empty one).
    const auto ids = [&] {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& vp : cm.model.vps)
        for (const auto& v : vp.variant_ids()) pairs.emplace_back(vp.id, v);
      return pairs;
    }();
    for (int k = 0; k < 6 && !ids.empty(); ++k) {
      configurator::TenantConfiguration cfg{cm.model.name, {}};
      if (!valid.empty())
        cfg = valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)];
      else
        for (const auto& vp : cm.model.vps) cfg.selections.emplace_back(vp.id, std::vector<std::string>{});
      const int how = std::uniform_int_distribution<int>(0, 3)(rng);
      const auto& [cp, v] = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
      for (auto& [id, chosen] : cfg.selections) {
        if (how <= 1 && id == cp) {
          auto it = std::find(chosen.begin(), chosen.end(), v);
          if (it == chosen.end())
            chosen.push_back(v);
          else
            chosen.erase(it);
        }
      }
      if (how == 2) cfg.selections.front().second.push_back("NoSuchVariant");
      if (how == 3) cfg.selections.emplace_back("NoSuchPoint", std::vector<std::string>{v});
      const auto expected = testing::expected_codes(cm, cfg);
      if (expected.empty()) continue;
      ++mutated;
      const auto got = code_set(configurator::validate_configuration(cm, cfg));
      if (got != expected) fail("model " + std::to_string(index) + ": mutated configuration reported wrong codes");
    }
  }
  std::ostringstream d;
  d << models << " customization models, " << checked << " assignments, " << mutated << " mutated invalid, "
    << disagreements << " disagreements";
  if (!first.empty()) d << "; first: " << first;
  return {disagreements == 0 && mutated >= static_cast<std::size_t>(kMutations), d.str()};
}

// Checks one session state against the configurations consistent with its
// tenant decisions. Returns an empty string when sound (and complete in
// exact mode).
std::string check_session(const configurator::ConfiguratorSession& s,
                          const std::vector<configurator::TenantConfiguration>& valid) {
  using configurator::Decision;
  auto selected = [](const configurator::TenantConfiguration& cfg, const configurator::Pair& p) {
    const auto* chosen = cfg.find(p.cp);
    return chosen && std::find(chosen->begin(), chosen->end(), p.variant) != chosen->end();
  };
  std::vector<const configurator::TenantConfiguration*> consistent;
  for (const auto& cfg : valid) {
    bool ok = true;
    for (const auto& [p, value] : s.tenant_decisions())
      if (selected(cfg, p) != (value == Decision::selected)) ok = false;
    if (ok) consistent.push_back(&cfg);
  }
  if (s.conflict()) return consistent.empty() ? "" : "conflict reported but completions exist";
  if (consistent.empty() && s.mode() == configurator::Mode::exact) return "no completion but no conflict reported";
  for (const auto& st : s.pairs()) {
    if (st.tenant) continue;
    bool always_on = true;
    bool always_off = true;
    for (const auto* cfg : consistent) {
      if (selected(*cfg, st.pair))
        always_off = false;
      else
        always_on = false;
    }
    if (st.forced && st.value == Decision::selected && !always_on) return "unsound forced selection " + st.pair.variant;
    if (st.forced && st.value == Decision::deselected && !always_off) return "unsound forced deselection " + st.pair.variant;
    if (s.mode() == configurator::Mode::exact && !consistent.empty() && (always_on || always_off) && !st.forced)
      return "incomplete: " + st.pair.cp + "." + st.pair.variant + " is fixed but not forced";
  }
  return {};
}

Outcome session_soundness() {
  auto& c = corpus();
  testing::Rng rng(4242);
  int sessions = 0;
  int heuristic_sessions = 0;
  int steps = 0;
  int violations = 0;
  std::string first;

  auto run = [&](const derivation::CustomizationModel& cm, const std::string& label) {
    const auto valid = testing::valid_configurations(cm);
    auto started = configurator::new_session(std::make_shared<const derivation::CustomizationModel>(cm));
    if (!started) {
      if (!valid.empty()) {
        ++violations;
        if (first.empty()) first = label + ": void session on a non-void model";
      }
      return;
    }
    ++sessions;
    if (started->mode() == configurator::Mode::heuristic) ++heuristic_sessions;
    auto s = std::move(*started);
    std::vector<configurator::Pair> open;
    for (const auto& st : s.pairs())
      if (!st.mandatory) open.push_back(st.pair);
    for (int k = 0; k < 8 && !open.empty(); ++k) {
      ++steps;
      const auto& p = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
      const bool undo = !s.tenant_decisions().empty() && std::bernoulli_distribution(0.2)(rng);
      if (undo) {
        const auto& last = s.tenant_decisions()[std::uniform_int_distribution<std::size_t>(0, s.tenant_decisions().size() - 1)(rng)].first;
        auto r = configurator::retract(s, last.cp, last.variant);
        if (r) s = std::move(*r);
      } else {
        const auto value = std::bernoulli_distribution(0.5)(rng) ? configurator::Decision::selected
                                                                   : configurator::Decision::deselected;
        auto r = configurator::decide(s, p.cp, p.variant, value);
        if (r) s = std::move(r->session);
      }
      if (auto problem = check_session(s, valid); !problem.empty()) {
        ++violations;
        if (first.empty()) first = label + ": " + problem;
      }
    }
  };

  for (std::size_t i = 0; i < c.derivations.size() && sessions < 2 * kSessions; i += 3)
    run(c.derivations[i].second.customization, "derived " + std::to_string(i));
  for (int i = 0; i < 30; ++i) {
    auto m = testing::random_customization_model(rng, 17, 19, 4);
    auto cm = derivation::as_customization_model(m);
    run(*cm, "wide " + std::to_string(i));
  }
  std::ostringstream d;
  d << sessions << " sessions (" << heuristic_sessions << " starting heuristic), " << steps << " steps, " << violations
    << " violations";
  if (!first.empty()) d << "; first: " << first;
  return {violations == 0 && sessions >= kSessions && heuristic_sessions > 0, d.str()};
}

Outcome round_trip() {
  int failures = 0;
  std::string first;
  auto check = [&](const VariabilityModel& m, const std::string& label) {
    const std::string a = text::serialize(m);
    const std::string b = text::serialize(m);
    auto back = text::parse(a);
    if (a != b || !back || *back != m || text::serialize(*back) != a) {
      ++failures;
      if (first.empty()) first = label;
    }
  };
  int fixtures = 0;
  for (const char* name : {"fig4.ovm", "fig4_guarded.ovm", "golden/fig5.ovm", "golden/fig6.ovm"}) {
    const auto source = fixture(name);
    auto m = text::parse(source);
    if (!m || text::serialize(*m) != source) {
      ++failures;
      if (first.empty()) first = name;
      continue;
    }
    check(*m, name);
    ++fixtures;
  }
  testing::Rng rng(99);
  for (int i = 0; i < kRoundTripModels; ++i) check(testing::random_model(rng), "random model " + std::to_string(i));
  std::ostringstream d;
  d << fixtures << " fixtures + " << kRoundTripModels << " random models, " << failures << " failures";
  if (!first.empty()) d << "; first: " << first;
  return {failures == 0, d.str()};
}

workflow::ActivityGraph chain_graph(const std::vector<std::string>& actions) {
  workflow::ActivityGraph g;
  g.entry = "start";
  g.exit = "end";
  g.nodes.push_back({"start", workflow::NodeKind::initial, {}, {}});
  for (const auto& a : actions) g.nodes.push_back({a, workflow::NodeKind::action, {}, {}});
  g.nodes.push_back({"end", workflow::NodeKind::final, {}, {}});
  for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i) g.edges.push_back({g.nodes[i].id, g.nodes[i + 1].id, {}, {}});
  return g;
}

Outcome workflow_resolution() {
  using namespace workflow;
  const auto source = parse_fixture("fig4_guarded.ovm");
  const auto source_text = fixture("fig4_guarded.ovm");
  auto graph = json::graph_from_json(json::Json::parse(fixture("fig9.awf")));
  if (!graph) return {false, "fig9.awf does not load"};
  if (!validate_workflow(*graph, source).empty()) return {false, "fig9.awf does not validate"};
  auto d = derivation::derive(source, bind({{"VP1", {"V1"}}, {"VP2", {"VC3"}}}));
  if (!d) return {false, "derivation failed"};
  auto resolved = resolve_workflow(*graph, d->customization, d->trace);
  if (!resolved) return {false, "resolution failed"};

  std::vector<std::string> problems;
  int decisions = 0;
  int merges = 0;
  for (const auto& n : resolved->nodes) {
    if (n.kind == NodeKind::decision) {
      ++decisions;
      int guarded = 0;
      int out = 0;
      for (const auto& e : resolved->edges) {
        if (e.from != n.id) continue;
        ++out;
        if (!e.guard) continue;
        ++guarded;
        // Guards appear verbatim (escaped) in the model text.
        std::string escaped;
        for (char ch : *e.guard) escaped += ch == '"' ? std::string("\\\"") : std::string(1, ch);
        if (source_text.find("when \"" + escaped + "\"") == std::string::npos) problems.push_back("guard altered");
      }
      if (out != 2 || guarded != 2) problems.push_back("decision does not have 2 guarded edges");
    }
    if (n.kind == NodeKind::merge) ++merges;
    if (n.kind == NodeKind::vp_region) problems.push_back("vp_region left behind");
  }
  if (decisions != 1 || merges != 1) problems.push_back("expected one decision and one merge");

  // Fragment conservation.
  std::vector<std::string> expected_actions;
  for (const auto& n : graph->nodes) {
    if (n.kind == NodeKind::action) expected_actions.push_back(n.id);
    const std::map<std::string, std::vector<std::string>> kept{
        {"VP1", {"V1"}}, {"VP2", {"VC3"}}, {"CP1", {"V4", "V5"}}, {"CP3", {"V7"}}};
    if (auto it = kept.find(n.vp); it != kept.end() && n.kind == NodeKind::vp_region)
      for (const auto& v : it->second)
        if (const auto* r = n.region(v))
          for (const auto& id : action_ids(r->fragment)) expected_actions.push_back(id);
  }
  auto got_actions = action_ids(*resolved);
  std::sort(expected_actions.begin(), expected_actions.end());
  std::sort(got_actions.begin(), got_actions.end());
  if (got_actions != expected_actions) problems.push_back("fragment conservation");

  // Hand-built expected graphs.
  ActivityGraph expected = chain_graph({"receive_order", "validate_card", "pack_express"});
  expected.nodes.insert(expected.nodes.end() - 1,
                        {{"d", NodeKind::decision, "CP1", {}},
                         {"notify_email_draft", NodeKind::action, {}, {}},
                         {"notify_email_send", NodeKind::action, {}, {}},
                         {"notify_portal", NodeKind::action, {}, {}},
                         {"m", NodeKind::merge, "CP1", {}},
                         {"insure_parcel", NodeKind::action, {}, {}},
                         {"ship", NodeKind::action, {}, {}}});
  expected.edges = {{"start", "receive_order", {}, {}},
                    {"receive_order", "validate_card", {}, {}},
                    {"validate_card", "pack_express", {}, {}},
                    {"pack_express", "d", {}, {}},
                    {"d", "notify_email_draft", "order.total > 500", "V4"},
                    {"notify_email_draft", "notify_email_send", {}, {}},
                    {"notify_email_send", "m", {}, "V4"},
                    {"d", "notify_portal", "customer.tier in [\"gold\", \"silver\"]", "V5"},
                    {"notify_portal", "m", {}, "V5"},
                    {"m", "insure_parcel", {}, {}},
                    {"insure_parcel", "ship", {}, {}},
                    {"ship", "end", {}, {}}};
  if (!isomorphic(*resolved, expected)) problems.push_back("resolved graph is not isomorphic to the expected one");

  configurator::TenantConfiguration cfg{"Fig4-derived", {{"CP1", {"V5"}}, {"CP3", {"V7"}}}};
  auto applied = apply_configuration(*resolved, cfg, d->customization);
  const auto collapsed =
      chain_graph({"receive_order", "validate_card", "pack_express", "notify_portal", "insure_parcel", "ship"});
  if (!applied || !isomorphic(*applied, collapsed)) problems.push_back("{CP1:[V5]} does not collapse to a splice");

  std::ostringstream out;
  out << decisions << " decision, " << merges << " merge, " << got_actions.size() << " actions conserved";
  for (const auto& p : problems) out << "; " << p;
  return {problems.empty(), out.str()};
}

Outcome trace_replay() {
  int checked = 0;
  int failures = 0;
  auto check = [&](const VariabilityModel& source, const derivation::Derivation& d) {
    ++checked;
    if (derivation::replay(source, d.trace) != d.customization.model) ++failures;
  };
  for (const char* name : {"fig4.ovm", "fig4_guarded.ovm"}) {
    const auto source = parse_fixture(name);
    for (const auto& b : testing::all_bindings(source))
      if (auto d = derivation::derive(source, b)) check(source, *d);
  }
  for (const auto& [index, d] : corpus().derivations) check(corpus().models[index], d);
  std::ostringstream out;
  out << checked << " derivations replayed, " << failures << " mismatches";
  return {failures == 0 && checked > 0, out.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fig5-reproduction", fig5},
      {"fig6-reproduction", fig6},
      {"oracle-equivalence", oracle_equivalence},
      {"validator-agreement", validator_agreement},
      {"session-soundness", session_soundness},
      {"round-trip", round_trip},
      {"workflow-resolution", workflow_resolution},
      {"trace-replay", trace_replay},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << std::left << std::setw(20) << name << ' ' << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << '/' << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
