#include <doctest.h>

#include <stdexcept>

#include "helpers.hpp"
#include "ovm/configurator.hpp"

using namespace ovm;
using namespace ovm::configurator;
using ovm::test::customization;
using ovm::test::fig5;
using ovm::test::fig6;

namespace {

ConfiguratorSession open(const derivation::CustomizationModel& cm) {
  auto s = new_session(std::make_shared<const derivation::CustomizationModel>(cm));
  REQUIRE(s.has_value());
  return *s;
}

DecisionResult decide_ok(const ConfiguratorSession& s, std::string_view cp, std::string_view v, Decision d) {
  auto r = decide(s, cp, v, d);
  REQUIRE(r.has_value());
  return *r;
}

std::string error_code(const Diagnostics& ds) {
  REQUIRE_FALSE(ds.empty());
  return ds.front().code;
}

const char* kExcludes = "model \"m\" cp A layer process { optional P; optional Q; } P excludes Q;";

}  // namespace

TEST_CASE("fig5 session starts with CP3 locked") {
  const auto s = open(fig5());
  CHECK(s.mode() == Mode::exact);
  CHECK_FALSE(s.conflict());
  REQUIRE(s.pairs().size() == 3);
  const auto* v7 = s.find("CP3", "V7");
  REQUIRE(v7 != nullptr);
  CHECK(v7->mandatory);
  CHECK(v7->value == Decision::selected);
  CHECK(s.value("CP1", "V4") == Decision::undecided);
}

TEST_CASE("fig5: select V4 then V5") {
  const auto s0 = open(fig5());
  const auto r1 = decide_ok(s0, "CP1", "V4", Decision::selected);
  CHECK_FALSE(r1.report.conflict);
  CHECK(r1.report.newly_forced.empty());
  CHECK(r1.session.value("CP1", "V5") == Decision::undecided);
  const auto r2 = decide_ok(r1.session, "CP1", "V5", Decision::selected);
  CHECK_FALSE(r2.report.conflict);
  auto cfg = complete(r2.session);
  REQUIRE(cfg.has_value());
  CHECK(cfg->model_name == "Fig4-derived");
  CHECK(*cfg->find("CP1") == std::vector<std::string>{"V4", "V5"});
  CHECK(*cfg->find("CP3") == std::vector<std::string>{"V7"});
}

TEST_CASE("deselecting V4 forces V5 to meet the minimum") {
  const auto r = decide_ok(open(fig5()), "CP1", "V4", Decision::deselected);
  REQUIRE(r.report.newly_forced.size() == 1);
  CHECK(r.report.newly_forced[0] == Pair{"CP1", "V5"});
  CHECK(r.session.value("CP1", "V5") == Decision::selected);
  CHECK(r.session.find("CP1", "V5")->forced);
}

TEST_CASE("selecting one side of an excludes forces the other off") {
  const auto s = open(customization(kExcludes));
  const auto r = decide_ok(s, "A", "P", Decision::selected);
  CHECK(r.session.value("A", "Q") == Decision::deselected);
  CHECK(r.session.forced() == std::vector<Pair>{{"A", "Q"}});

  SUBCASE("retracting a forced pair is SES004") {
    auto bad = retract(r.session, "A", "Q");
    REQUIRE_FALSE(bad.has_value());
    CHECK(error_code(bad.error()) == "SES004");
  }
  SUBCASE("overriding a forced pair is a conflict, not an error") {
    const auto c = decide_ok(r.session, "A", "Q", Decision::selected);
    CHECK(c.report.conflict);
    CHECK(c.session.conflict());
    auto done = complete(c.session);
    REQUIRE_FALSE(done.has_value());
    CHECK(error_code(done.error()) == "CFG003");
    auto back = retract(c.session, "A", "Q");
    REQUIRE(back.has_value());
    CHECK_FALSE(back->conflict());
    CHECK(*back == r.session);
  }
  SUBCASE("confirming a forced value changes nothing") {
    const auto same = decide_ok(r.session, "A", "Q", Decision::deselected);
    CHECK(same.session == r.session);
  }
}

TEST_CASE("session error codes") {
  const auto s = open(fig5());
  auto locked = decide(s, "CP3", "V7", Decision::deselected);
  REQUIRE_FALSE(locked.has_value());
  CHECK(error_code(locked.error()) == "SES002");

  auto unknown = decide(s, "CP1", "V3", Decision::selected);
  REQUIRE_FALSE(unknown.has_value());
  CHECK(error_code(unknown.error()) == "SES003");

  auto never = retract(s, "CP1", "V4");
  REQUIRE_FALSE(never.has_value());
  CHECK(error_code(never.error()) == "SES004");

  auto mandatory = retract(s, "CP3", "V7");
  REQUIRE_FALSE(mandatory.has_value());
  CHECK(error_code(mandatory.error()) == "SES002");

  CHECK_THROWS_AS((void)decide(s, "CP1", "V4", Decision::undecided), std::invalid_argument);
}

TEST_CASE("void customization model cannot open a session") {
  auto s = new_session(std::make_shared<const derivation::CustomizationModel>(
      customization("model \"m\" cp A layer process { mandatory P; mandatory Q; } P excludes Q;")));
  REQUIRE_FALSE(s.has_value());
  CHECK(error_code(s.error()) == "SES001");
}

TEST_CASE("select then retract restores the session") {
  const auto s0 = open(fig5());
  const auto r = decide_ok(s0, "CP1", "V4", Decision::deselected);
  auto back = retract(r.session, "CP1", "V4");
  REQUIRE(back.has_value());
  CHECK(*back == s0);
}

TEST_CASE("sessions are values") {
  const auto s0 = open(fig5());
  const auto copy = s0;
  (void)decide_ok(s0, "CP1", "V4", Decision::deselected);
  CHECK(s0 == copy);
  CHECK(s0.value("CP1", "V5") == Decision::undecided);
}

TEST_CASE("changing a decision replays") {
  const auto s0 = open(fig5());
  const auto a = decide_ok(s0, "CP1", "V4", Decision::deselected);
  const auto b = decide_ok(a.session, "CP1", "V4", Decision::selected);
  CHECK(b.session.value("CP1", "V5") == Decision::undecided);
  CHECK(b.session == decide_ok(s0, "CP1", "V4", Decision::selected).session);
}

TEST_CASE("complete treats undecided as deselected") {
  auto six = complete(open(fig6()));
  REQUIRE(six.has_value());
  CHECK(*six->find("CP1") == std::vector<std::string>{"V5"});
  CHECK(*six->find("CP2") == std::vector<std::string>{"V6"});

  auto five = complete(open(fig5()));
  REQUIRE_FALSE(five.has_value());
  CHECK(error_code(five.error()) == "CFG002");
}

TEST_CASE("large models switch to heuristic mode") {
  std::string src = "model \"big\" cp A layer process {";
  for (int i = 0; i < exact_pair_cap + 3; ++i) src += " optional V" + std::to_string(i) + ";";
  src += " } V0 excludes V1;";
  const auto s = open(customization(src));
  CHECK(s.mode() == Mode::heuristic);
  const auto r = decide_ok(s, "A", "V0", Decision::selected);
  CHECK(r.report.mode == Mode::heuristic);
  CHECK(r.session.value("A", "V1") == Decision::deselected);
}

TEST_CASE("validate_configuration codes") {
  const auto cm = fig5();
  auto codes_of = [&](TenantConfiguration cfg) {
    std::set<std::string> out;
    for (const auto& d : validate_configuration(cm, cfg)) out.insert(d.code);
    return out;
  };
  CHECK(codes_of({"Fig4-derived", {{"CP1", {"V4"}}, {"CP3", {"V7"}}}}).empty());
  CHECK(codes_of({"Fig4-derived", {{"CP1", {"V4"}}}}) == std::set<std::string>{"CFG001"});
  CHECK(codes_of({"Fig4-derived", {{"CP1", {}}, {"CP3", {"V7"}}}}) == std::set<std::string>{"CFG002"});
  CHECK(codes_of({"Fig4-derived", {{"CP1", {"V3"}}, {"CP3", {"V7"}}}}).count("CFG004") == 1);
  CHECK(codes_of({"Fig4-derived", {{"CP1", {"V4"}}, {"CP3", {"V7"}}, {"CP9", {"X"}}}}) ==
        std::set<std::string>{"CFG004"});

  const auto ex = customization(kExcludes);
  CHECK(validate_configuration(ex, {"m", {{"A", {"P", "Q"}}}}).front().code == "CFG003");
}
