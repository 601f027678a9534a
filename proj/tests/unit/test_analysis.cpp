#include <doctest.h>

#include "helpers.hpp"
#include "ovm/analysis.hpp"

using namespace ovm;
using namespace ovm::analysis;
using ovm::test::fig4;
using ovm::test::parse_ok;

TEST_CASE("fig4 has twelve full configurations") {
  const auto report = analyze(fig4());
  CHECK_FALSE(report.cap_exceeded);
  CHECK(report.configurations == 12);
  CHECK_FALSE(report.is_void);
  CHECK(report.dead.empty());
}

TEST_CASE("enumeration is sorted and every entry is valid") {
  const auto m = fig4();
  const auto e = enumerate_configurations(m);
  REQUIRE(e.configurations.size() == 12);
  CHECK(std::is_sorted(e.configurations.begin(), e.configurations.end()));
  for (const auto& c : e.configurations) CHECK(is_valid(m, c));
}

TEST_CASE("small models count as expected") {
  CHECK(analyze(parse_ok("model \"m\" cp A layer process { mandatory V1; }"), default_cap, Scope::tenant)
            .configurations == 1);
  CHECK(analyze(parse_ok("model \"m\" cp A layer process { optional V1; }"), default_cap, Scope::tenant)
            .configurations == 2);
  CHECK(analyze(parse_ok("model \"m\" cp A layer process { alt [1..2] { V1; V2; V3; } }"), default_cap, Scope::tenant)
            .configurations == 6);
}

TEST_CASE("void model makes every variant dead") {
  const auto m = parse_ok("model \"m\" cp A layer process { mandatory V1; mandatory V2; } V1 excludes V2;");
  const auto report = analyze(m, default_cap, Scope::tenant);
  CHECK(report.configurations == 0);
  CHECK(report.is_void);
  CHECK(report.dead == std::vector<std::string>{"V1", "V2"});
}

TEST_CASE("a variant excluded by a mandatory one is dead") {
  const auto m = parse_ok("model \"m\" cp A layer process { mandatory V1; optional V2; } V1 excludes V2;");
  CHECK(*dead_variants(m, default_cap, Scope::tenant) == std::vector<std::string>{"V2"});
  CHECK(*is_void(m, default_cap, Scope::tenant) == false);
}

TEST_CASE("scope decides whether a VP reference holds") {
  // Full scope: B is part of the product only when V2 is chosen.
  const auto m = parse_ok("model \"m\" cp A layer process { optional V1; } cp B layer process { optional V2; }"
                          " V1 requires B;");
  CHECK(analyze(m, default_cap, Scope::full).configurations == 3);
  CHECK(analyze(m, default_cap, Scope::tenant).configurations == 4);
}

TEST_CASE("cap stops enumeration") {
  const auto m = fig4();
  CHECK(raw_choice_space(m) == doctest::Approx(2 * 2 * 6));
  const auto report = analyze(m, 10);
  CHECK(report.cap_exceeded);
  CHECK_FALSE(is_void(m, 10).has_value());
  CHECK_FALSE(dead_variants(m, 10).has_value());
}
