#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "ovm/derivation.hpp"
#include "ovm/text.hpp"

namespace ovm::test {

inline std::string fixture(const std::string& name) {
  std::ifstream in(std::string(OVM_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline VariabilityModel parse_ok(const std::string& source) {
  auto m = text::parse(source);
  REQUIRE(m.has_value());
  return *m;
}

inline VariabilityModel fig4() { return parse_ok(fixture("fig4.ovm")); }

inline derivation::DeveloperBinding bind(
    std::initializer_list<std::pair<std::string, std::vector<std::string>>> choices) {
  return derivation::DeveloperBinding{{choices.begin(), choices.end()}};
}

inline derivation::CustomizationModel derive_ok(const VariabilityModel& m, const derivation::DeveloperBinding& b) {
  auto d = derivation::derive(m, b);
  REQUIRE(d.has_value());
  return d->customization;
}

inline derivation::CustomizationModel fig5() { return derive_ok(fig4(), bind({{"VP1", {"V1"}}, {"VP2", {"VC3"}}})); }
inline derivation::CustomizationModel fig6() { return derive_ok(fig4(), bind({{"VP1", {"V2"}}, {"VP2", {"VC2"}}})); }

inline derivation::CustomizationModel customization(const std::string& source) {
  auto cm = derivation::as_customization_model(parse_ok(source));
  REQUIRE(cm.has_value());
  return *cm;
}

}  // namespace ovm::test
