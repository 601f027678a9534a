#include <doctest.h>

#include "helpers.hpp"
#include "ovm/json_io.hpp"

using namespace ovm;
using json::Json;
using ovm::test::bind;
using ovm::test::fig4;

TEST_CASE("binding documents") {
  auto full = json::binding_from_json(Json::parse(R"({"bindings": {"VP1": ["V1"], "VP2": "VC3"}})"));
  REQUIRE(full.has_value());
  CHECK(*full == bind({{"VP1", {"V1"}}, {"VP2", {"VC3"}}}));

  auto bare = json::binding_from_json(Json::parse(R"({"VP1": ["V1"], "VP2": ["VC3"]})"));
  REQUIRE(bare.has_value());
  CHECK(*bare == *full);

  auto again = json::binding_from_json(json::to_json(*full));
  REQUIRE(again.has_value());
  CHECK(*again == *full);

  CHECK_FALSE(json::binding_from_json(Json::parse(R"({"bindings": {"VP1": [1]}})")).has_value());
  CHECK_FALSE(json::binding_from_json(Json::parse("[]")).has_value());
}

TEST_CASE("configuration documents round trip") {
  auto cfg = json::configuration_from_json(Json::parse(R"({"model": "M", "selections": {"CP1": ["V5"], "CP3": []}})"));
  REQUIRE(cfg.has_value());
  CHECK(cfg->model_name == "M");
  CHECK(cfg->selections.size() == 2);
  auto again = json::configuration_from_json(json::to_json(*cfg));
  REQUIRE(again.has_value());
  CHECK(*again == *cfg);
  CHECK(json::configuration_from_json(Json::parse(R"({"selections": {}})"))->model_name.empty());
  CHECK_FALSE(json::configuration_from_json(Json::parse(R"({"model": "M"})")).has_value());
}

TEST_CASE("trace effects serialize with kind and cause") {
  auto d = derivation::derive(fig4(), bind({{"VP1", {"V1"}}, {"VP2", {"VC3"}}}));
  REQUIRE(d.has_value());
  const Json trace = json::to_json(d->trace);
  REQUIRE(trace.is_array());
  bool saw_removed = false;
  for (const auto& e : trace) {
    REQUIRE(e.contains("kind"));
    if (e["kind"] == "variant-removed" && e["variant"] == "V3") {
      saw_removed = true;
      CHECK(e["cause"] == "V1 excludes V3");
    }
  }
  CHECK(saw_removed);
}

TEST_CASE("analysis report document") {
  analysis::Report r;
  r.configurations = 12;
  CHECK(json::to_json(r) == Json::parse(R"({"configurations": 12, "void": false, "dead": [], "mode": "exact"})"));
  r.cap_exceeded = true;
  const Json capped = json::to_json(r);
  CHECK(capped["configurations"].is_null());
  CHECK(capped["mode"] == "cap-exceeded");
}

TEST_CASE("decision values") {
  CHECK(*json::decision_from_json("selected") == configurator::Decision::selected);
  CHECK(*json::decision_from_json(false) == configurator::Decision::deselected);
  CHECK_FALSE(json::decision_from_json("maybe").has_value());
}

TEST_CASE("diagnostic documents") {
  Diagnostic d = make_error(codes::vp_without_variants, "no variants", {"VP1"});
  d.location = SourceSpan{2, 5, 3};
  const Json j = json::to_json(d);
  CHECK(j["code"] == "OVM001");
  CHECK(j["severity"] == "error");
  CHECK(j["subject"] == Json::array({"VP1"}));
  CHECK(j["location"]["line"] == 2);
}

TEST_CASE("malformed JSON text is a document error") {
  auto bad = json::parse("{\"a\": ");
  REQUIRE_FALSE(bad.has_value());
  CHECK_FALSE(bad.error().message.empty());
}
