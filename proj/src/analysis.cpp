#include "ovm/analysis.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace ovm::analysis {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// All choices a single VP admits on its own, each sorted.
std::vector<std::vector<std::string>> vp_choices(const VariationPoint& vp) {
  std::vector<std::string> base;
  for (const auto& e : vp.mandatory_edges) base.push_back(e.variant_id);

  std::vector<std::vector<std::string>> with_optional{base};
  for (const auto& e : vp.optional_edges) {
    const std::size_t n = with_optional.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto extended = with_optional[i];
      extended.push_back(e.variant_id);
      with_optional.push_back(std::move(extended));
    }
  }
  if (!vp.group) {
    for (auto& c : with_optional) std::sort(c.begin(), c.end());
    return with_optional;
  }

  const auto& members = vp.group->members;
  const int n = static_cast<int>(members.size());
  std::vector<std::vector<std::string>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int count = __builtin_popcount(mask);
    if (count < vp.group->min || count > vp.group->max) continue;
    for (const auto& prefix : with_optional) {
      auto c = prefix;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) c.push_back(members[i].variant_id);
      std::sort(c.begin(), c.end());
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace

const VpChoice* FullConfiguration::find(std::string_view vp) const {
  for (const auto& c : choices)
    if (c.vp == vp) return &c;
  return nullptr;
}

double raw_choice_space(const VariabilityModel& model) {
  double space = 1;
  for (const auto& vp : model.vps) {
    double local = 1;
    for (std::size_t i = 0; i < vp.optional_edges.size(); ++i) local *= 2;
    if (vp.group) {
      double group = 0;
      const int n = static_cast<int>(vp.group->members.size());
      for (int k = vp.group->min; k <= vp.group->max; ++k) group += binomial(n, k);
      local *= group;
    }
    space *= local;
  }
  return space;
}

bool is_valid(const VariabilityModel& model, const FullConfiguration& config, Scope scope) {
  if (config.choices.size() != model.vps.size()) return false;
  std::unordered_set<std::string> selected;
  std::unordered_set<std::string> part;
  for (std::size_t i = 0; i < model.vps.size(); ++i) {
    const auto& vp = model.vps[i];
    const auto& choice = config.choices[i];
    if (choice.vp != vp.id) return false;
    std::set<std::string> chosen(choice.variants.begin(), choice.variants.end());
    for (const auto& id : chosen)
      if (!vp.attaches(id)) return false;
    for (const auto& e : vp.mandatory_edges)
      if (chosen.count(e.variant_id) == 0) return false;
    if (vp.group) {
      const int count = static_cast<int>(std::count_if(vp.group->members.begin(), vp.group->members.end(),
                                                       [&](const VariantEdge& e) { return chosen.count(e.variant_id); }));
      if (count < vp.group->min || count > vp.group->max) return false;
    }
    selected.insert(chosen.begin(), chosen.end());
    if (scope == Scope::tenant || !chosen.empty()) part.insert(vp.id);
  }
  auto holds = [&](const std::string& id) {
    return model.is_vp(id) ? part.count(id) != 0 : selected.count(id) != 0;
  };
  for (const auto& c : model.constraints) {
    const bool s = holds(c.source);
    const bool t = holds(c.target);
    if (c.kind == ConstraintKind::require ? (s && !t) : (s && t)) return false;
  }
  return true;
}

Enumeration enumerate_configurations(const VariabilityModel& model, std::size_t cap, Scope scope) {
  Enumeration result;
  result.raw_space = raw_choice_space(model);
  const bool wide_group = std::any_of(model.vps.begin(), model.vps.end(), [](const VariationPoint& vp) {
    return vp.group && vp.group->members.size() > 30;
  });
  if (wide_group || result.raw_space > static_cast<double>(cap)) {
    result.cap_exceeded = true;
    return result;
  }

  std::vector<std::vector<std::vector<std::string>>> per_vp;
  per_vp.reserve(model.vps.size());
  for (const auto& vp : model.vps) per_vp.push_back(vp_choices(vp));

  FullConfiguration current;
  current.choices.resize(model.vps.size());
  for (std::size_t i = 0; i < model.vps.size(); ++i) current.choices[i].vp = model.vps[i].id;

  // Odometer over the per-VP choice lists.
  std::vector<std::size_t> index(model.vps.size(), 0);
  const bool empty = std::any_of(per_vp.begin(), per_vp.end(), [](const auto& c) { return c.empty(); });
  if (!empty) {
    for (;;) {
      for (std::size_t i = 0; i < index.size(); ++i) current.choices[i].variants = per_vp[i][index[i]];
      if (is_valid(model, current, scope)) result.configurations.push_back(current);
      std::size_t k = 0;
      while (k < index.size() && ++index[k] == per_vp[k].size()) index[k++] = 0;
      if (k == index.size()) break;
    }
  }
  std::sort(result.configurations.begin(), result.configurations.end());
  return result;
}

Enumeration enumerate_configurations(const derivation::CustomizationModel& cm, std::size_t cap) {
  return enumerate_configurations(cm.model, cap, Scope::tenant);
}

std::optional<bool> is_void(const VariabilityModel& model, std::size_t cap, Scope scope) {
  auto e = enumerate_configurations(model, cap, scope);
  if (e.cap_exceeded) return std::nullopt;
  return e.configurations.empty();
}

std::optional<std::vector<std::string>> dead_variants(const VariabilityModel& model, std::size_t cap, Scope scope) {
  auto e = enumerate_configurations(model, cap, scope);
  if (e.cap_exceeded) return std::nullopt;
  std::unordered_set<std::string> alive;
  for (const auto& config : e.configurations)
    for (const auto& choice : config.choices) alive.insert(choice.variants.begin(), choice.variants.end());
  std::vector<std::string> dead;
  for (const auto& v : model.variants)
    if (alive.count(v.id) == 0) dead.push_back(v.id);
  return dead;
}

Report analyze(const VariabilityModel& model, std::size_t cap, Scope scope) {
  Report report;
  auto e = enumerate_configurations(model, cap, scope);
  if (e.cap_exceeded) {
    report.cap_exceeded = true;
    return report;
  }
  report.configurations = e.configurations.size();
  report.is_void = e.configurations.empty();
  std::unordered_set<std::string> alive;
  for (const auto& config : e.configurations)
    for (const auto& choice : config.choices) alive.insert(choice.variants.begin(), choice.variants.end());
  for (const auto& v : model.variants)
    if (alive.count(v.id) == 0) report.dead.push_back(v.id);
  return report;
}

}  // namespace ovm::analysis
