#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ovm/derivation.hpp"
#include "ovm/model.hpp"

namespace ovm::analysis {

/// How variation-point references in constraints are read.
///   full   - a VP is part of the product iff one of its variants is chosen.
///   tenant - every VP of a customization model is a surviving customization
///            point and therefore always part of the product.
enum class Scope { full, tenant };

struct VpChoice {
  std::string vp;
  std::vector<std::string> variants;  // sorted

  auto operator<=>(const VpChoice&) const = default;
  bool operator==(const VpChoice&) const = default;
};

/// One chosen-variant set per variation point, in declaration order.
struct FullConfiguration {
  std::vector<VpChoice> choices;

  const VpChoice* find(std::string_view vp) const;
  auto operator<=>(const FullConfiguration&) const = default;
  bool operator==(const FullConfiguration&) const = default;
};

inline constexpr std::size_t default_cap = 1'000'000;

struct Enumeration {
  bool cap_exceeded = false;
  double raw_space = 0;  // number of assignments the structure alone allows
  std::vector<FullConfiguration> configurations;
};

/// Every configuration satisfying mandatory edges, group cardinalities and
/// all constraints, in lexicographic order. When the raw choice space exceeds
/// `cap` nothing is enumerated and `cap_exceeded` is set.
Enumeration enumerate_configurations(const VariabilityModel& model, std::size_t cap = default_cap,
                                     Scope scope = Scope::full);
Enumeration enumerate_configurations(const derivation::CustomizationModel& cm, std::size_t cap = default_cap);

/// Number of structurally possible assignments (before constraints).
double raw_choice_space(const VariabilityModel& model);

/// The validity predicate the enumeration lists.
bool is_valid(const VariabilityModel& model, const FullConfiguration& config, Scope scope = Scope::full);

/// nullopt when the cap is exceeded.
std::optional<bool> is_void(const VariabilityModel& model, std::size_t cap = default_cap, Scope scope = Scope::full);
std::optional<std::vector<std::string>> dead_variants(const VariabilityModel& model, std::size_t cap = default_cap,
                                                      Scope scope = Scope::full);

struct Report {
  bool cap_exceeded = false;
  std::size_t configurations = 0;
  bool is_void = false;
  std::vector<std::string> dead;
};

Report analyze(const VariabilityModel& model, std::size_t cap = default_cap, Scope scope = Scope::full);

}  // namespace ovm::analysis
