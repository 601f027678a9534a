#include "ovm/configurator.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace ovm::configurator {

const std::vector<std::string>* TenantConfiguration::find(std::string_view cp) const {
  for (const auto& [id, variants] : selections)
    if (id == cp) return &variants;
  return nullptr;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::selected: return "selected";
    case Decision::deselected: return "deselected";
    case Decision::undecided: return "undecided";
  }
  return "undecided";
}

std::string_view to_string(Mode m) { return m == Mode::exact ? "exact" : "heuristic"; }

Diagnostics validate_configuration(const CustomizationModel& cm, const TenantConfiguration& cfg) {
  const VariabilityModel& m = cm.model;
  Diagnostics out;
  std::unordered_set<std::string> selected;

  for (const auto& [cp, variants] : cfg.selections) {
    const VariationPoint* vp = m.find_vp(cp);
    if (vp == nullptr) {
      out.push_back(make_error(codes::unknown_selection, "unknown customization point '" + cp + "'", {cp}));
      continue;
    }
    for (const auto& v : variants) {
      if (vp->attaches(v))
        selected.insert(v);
      else
        out.push_back(make_error(codes::unknown_selection, "'" + v + "' is not offered at '" + cp + "'", {cp, v}));
    }
  }

  static const std::vector<std::string> kNone;
  for (const auto& vp : m.vps) {
    const std::vector<std::string>* picked = cfg.find(vp.id);
    if (picked == nullptr) picked = &kNone;
    auto chosen = [&](const std::string& v) { return std::find(picked->begin(), picked->end(), v) != picked->end(); };
    for (const auto& e : vp.mandatory_edges) {
      if (!chosen(e.variant_id))
        out.push_back(make_error(codes::missing_mandatory,
                                 "mandatory variant '" + e.variant_id + "' of '" + vp.id + "' is not selected",
                                 {vp.id, e.variant_id}));
    }
    if (vp.group) {
      const auto& g = *vp.group;
      const int count = static_cast<int>(
          std::count_if(g.members.begin(), g.members.end(), [&](const VariantEdge& e) { return chosen(e.variant_id); }));
      if (count < g.min || count > g.max)
        out.push_back(make_error(codes::cardinality_violation,
                                 "'" + vp.id + "' has " + std::to_string(count) + " group member(s) selected, outside " +
                                     format_cardinality(g.cardinality()),
                                 {vp.id}));
    }
  }

  auto holds = [&](const std::string& id) { return m.is_vp(id) || selected.count(id) != 0; };
  for (const auto& c : m.constraints) {
    const bool s = holds(c.source);
    const bool t = holds(c.target);
    if (c.kind == ConstraintKind::require ? (s && !t) : (s && t))
      out.push_back(make_error(codes::constraint_violation, "violates '" + describe(c) + "'", {c.source, c.target}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Session propagation

namespace {

using Tri = std::int8_t;  // -1 undecided, 0 deselected, 1 selected

/// Index-based view of a customization model for fast predicate evaluation.
struct Compiled {
  struct Group {
    std::vector<int> members;
    int min = 0;
    int max = 0;
  };
  struct Rule {
    ConstraintKind kind;
    int source;  // variant index, -1 for a customization point
    int target;
  };

  std::vector<Pair> pairs;
  std::vector<bool> mandatory;
  std::vector<Group> groups;
  std::vector<std::vector<int>> variant_pairs;
  std::vector<Rule> rules;

  explicit Compiled(const VariabilityModel& m) {
    std::unordered_map<std::string, int> variant_index;
    auto index_of = [&](const std::string& v) {
      auto [it, inserted] = variant_index.emplace(v, static_cast<int>(variant_pairs.size()));
      if (inserted) variant_pairs.emplace_back();
      return it->second;
    };
    for (const auto& vp : m.vps) {
      auto add = [&](const VariantEdge& e, bool is_mandatory) {
        const int p = static_cast<int>(pairs.size());
        pairs.push_back(Pair{vp.id, e.variant_id});
        mandatory.push_back(is_mandatory);
        variant_pairs[index_of(e.variant_id)].push_back(p);
        return p;
      };
      for (const auto& e : vp.mandatory_edges) add(e, true);
      for (const auto& e : vp.optional_edges) add(e, false);
      if (vp.group) {
        Group g{{}, vp.group->min, vp.group->max};
        for (const auto& e : vp.group->members) g.members.push_back(add(e, false));
        groups.push_back(std::move(g));
      }
    }
    for (const auto& c : m.constraints) {
      auto end = [&](const std::string& id) { return m.is_vp(id) ? -1 : index_of(id); };
      rules.push_back(Rule{c.kind, end(c.source), end(c.target)});
    }
  }

  int find(std::string_view cp, std::string_view variant) const {
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i].cp == cp && pairs[i].variant == variant) return static_cast<int>(i);
    return -1;
  }

  // 1 when some pair of the variant is selected, 0 when all are deselected.
  Tri variant_state(const std::vector<Tri>& v, int variant) const {
    if (variant < 0) return 1;
    bool unknown = false;
    for (int p : variant_pairs[variant]) {
      if (v[p] == 1) return 1;
      if (v[p] == -1) unknown = true;
    }
    return unknown ? -1 : 0;
  }

  bool valid(const std::vector<Tri>& v) const {
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (mandatory[i] && v[i] != 1) return false;
    for (const auto& g : groups) {
      int count = 0;
      for (int p : g.members) count += v[p] == 1;
      if (count < g.min || count > g.max) return false;
    }
    for (const auto& r : rules) {
      const bool s = variant_state(v, r.source) == 1;
      const bool t = variant_state(v, r.target) == 1;
      if (r.kind == ConstraintKind::require ? (s && !t) : (s && t)) return false;
    }
    return true;
  }

  // Forces a value in every valid completion iff it holds in all of them.
  bool exact(std::vector<Tri>& v, const std::vector<int>& free) const {
    const std::uint32_t n = static_cast<std::uint32_t>(free.size());
    const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1u;
    std::uint32_t seen_on = 0;
    std::uint32_t seen_off = 0;
    bool any = false;
    std::vector<Tri> trial = v;
    for (std::uint64_t mask = 0; mask <= all; ++mask) {
      for (std::uint32_t i = 0; i < n; ++i) trial[free[i]] = (mask >> i) & 1u ? 1 : 0;
      if (!valid(trial)) continue;
      any = true;
      seen_on |= static_cast<std::uint32_t>(mask);
      seen_off |= ~static_cast<std::uint32_t>(mask) & all;
    }
    if (!any) return false;
    for (std::uint32_t i = 0; i < n; ++i) {
      const bool on = seen_on & (1u << i);
      const bool off = seen_off & (1u << i);
      if (on != off) v[free[i]] = on ? 1 : 0;
    }
    return true;
  }

  // Unit rules to a fixpoint. Returns false on a detected conflict.
  bool heuristic(std::vector<Tri>& v) const {
    bool changed = true;
    bool ok = true;
    auto set = [&](int p, Tri value) {
      if (v[p] == value) return;
      if (v[p] != -1) {
        ok = false;
        return;
      }
      v[p] = value;
      changed = true;
    };
    auto clear_variant = [&](int variant) {
      if (variant < 0) {
        ok = false;  // customization points are always part of the product
        return;
      }
      for (int p : variant_pairs[variant]) set(p, 0);
    };
    while (changed && ok) {
      changed = false;
      for (const auto& r : rules) {
        const Tri s = variant_state(v, r.source);
        const Tri t = variant_state(v, r.target);
        if (r.kind == ConstraintKind::exclude) {
          if (s == 1) clear_variant(r.target);
          if (t == 1) clear_variant(r.source);
        } else {
          if (s == 1 && t == 0) ok = false;
          if (s == 1 && t == -1) {
            std::vector<int> open;
            for (int p : variant_pairs[r.target])
              if (v[p] != 0) open.push_back(p);
            if (open.size() == 1) set(open.front(), 1);
          }
          if (t == 0) clear_variant(r.source);
        }
      }
      for (const auto& g : groups) {
        int on = 0;
        int unknown = 0;
        for (int p : g.members) {
          on += v[p] == 1;
          unknown += v[p] == -1;
        }
        if (on > g.max || on + unknown < g.min) {
          ok = false;
        } else if (unknown > 0 && on == g.max) {
          for (int p : g.members)
            if (v[p] == -1) set(p, 0);
        } else if (unknown > 0 && on + unknown == g.min) {
          for (int p : g.members)
            if (v[p] == -1) set(p, 1);
        }
      }
    }
    if (!ok) return false;
    if (std::all_of(v.begin(), v.end(), [](Tri t) { return t != -1; })) return valid(v);
    return true;
  }
};

struct Outcome {
  bool consistent = true;
  Mode mode = Mode::exact;
  std::vector<Tri> values;
};

Outcome propagate(const Compiled& c, const std::vector<std::pair<Pair, Decision>>& decisions) {
  Outcome out;
  out.values.assign(c.pairs.size(), -1);
  for (std::size_t i = 0; i < c.pairs.size(); ++i)
    if (c.mandatory[i]) out.values[i] = 1;
  for (const auto& [pair, d] : decisions) {
    const int p = c.find(pair.cp, pair.variant);
    const Tri value = d == Decision::selected ? 1 : 0;
    if (out.values[p] != -1 && out.values[p] != value) {
      out.consistent = false;
      return out;
    }
    out.values[p] = value;
  }
  std::vector<int> free;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (out.values[i] == -1) free.push_back(static_cast<int>(i));
  out.mode = free.size() <= static_cast<std::size_t>(exact_pair_cap) ? Mode::exact : Mode::heuristic;
  out.consistent = out.mode == Mode::exact ? c.exact(out.values, free) : c.heuristic(out.values);
  return out;
}

Decision to_decision(Tri t) { return t == 1 ? Decision::selected : t == 0 ? Decision::deselected : Decision::undecided; }

}  // namespace

class SessionEngine {
 public:
  static Expected<ConfiguratorSession> initial(std::shared_ptr<const CustomizationModel> cm) {
    ConfiguratorSession s;
    s.model_ = std::move(cm);
    const Compiled c(s.model_->model);
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
      PairState st;
      st.pair = c.pairs[i];
      st.mandatory = c.mandatory[i];
      st.forced = st.mandatory;
      st.value = st.mandatory ? Decision::selected : Decision::undecided;
      s.pairs_.push_back(std::move(st));
    }
    const Outcome o = propagate(c, {});
    s.mode_ = o.mode;
    if (!o.consistent)
      return Diagnostics{make_error(codes::void_model,
                                    "customization model '" + s.model_->model.name + "' admits no valid configuration")};
    absorb(s, o);
    return s;
  }

  static void absorb(ConfiguratorSession& s, const Outcome& o) {
    for (std::size_t i = 0; i < s.pairs_.size(); ++i) {
      auto& st = s.pairs_[i];
      if (st.mandatory || st.tenant) continue;
      st.value = to_decision(o.values[i]);
      st.forced = o.values[i] != -1;
    }
    s.mode_ = o.mode;
  }

  static ConfiguratorSession step(ConfiguratorSession s, const Pair& pair, Decision value) {
    s.decisions_.emplace_back(pair, value);
    auto it = std::find_if(s.pairs_.begin(), s.pairs_.end(), [&](const PairState& st) { return st.pair == pair; });
    it->tenant = true;
    it->forced = false;
    it->value = value;
    if (s.conflict_) return s;
    const Compiled c(s.model_->model);
    const Outcome o = propagate(c, s.decisions_);
    if (!o.consistent) {
      s.conflict_ = true;
      s.mode_ = o.mode;
      return s;
    }
    absorb(s, o);
    return s;
  }

  static ConfiguratorSession replay(const ConfiguratorSession& base,
                                    const std::vector<std::pair<Pair, Decision>>& decisions) {
    // initial() cannot fail here: the model was accepted when the session began.
    ConfiguratorSession s = initial(base.model_).value();
    for (const auto& [pair, value] : decisions) s = step(std::move(s), pair, value);
    return s;
  }

  static std::vector<std::pair<Pair, Decision>>& decisions(ConfiguratorSession& s) { return s.decisions_; }
};

const PairState* ConfiguratorSession::find(std::string_view cp, std::string_view variant) const {
  for (const auto& st : pairs_)
    if (st.pair.cp == cp && st.pair.variant == variant) return &st;
  return nullptr;
}

Decision ConfiguratorSession::value(std::string_view cp, std::string_view variant) const {
  const PairState* st = find(cp, variant);
  return st ? st->value : Decision::undecided;
}

std::vector<Pair> ConfiguratorSession::forced() const {
  std::vector<Pair> out;
  for (const auto& st : pairs_)
    if (st.forced) out.push_back(st.pair);
  return out;
}

bool ConfiguratorSession::operator==(const ConfiguratorSession& other) const {
  const bool same_model = model_ == other.model_ || (model_ && other.model_ && *model_ == *other.model_);
  return same_model && pairs_ == other.pairs_ && decisions_ == other.decisions_ && mode_ == other.mode_ &&
         conflict_ == other.conflict_;
}

Expected<ConfiguratorSession> new_session(std::shared_ptr<const CustomizationModel> cm) {
  return SessionEngine::initial(std::move(cm));
}

namespace {

std::vector<Pair> newly_forced(const ConfiguratorSession& before, const ConfiguratorSession& after) {
  const auto old = before.forced();
  std::set<Pair> known(old.begin(), old.end());
  std::vector<Pair> out;
  for (const auto& p : after.forced())
    if (known.count(p) == 0) out.push_back(p);
  return out;
}

Diagnostics unknown_pair(std::string_view cp, std::string_view variant) {
  return {make_error(codes::unknown_pair,
                     "'" + std::string(variant) + "' is not offered at '" + std::string(cp) + "'",
                     {std::string(cp), std::string(variant)})};
}

Diagnostics locked(std::string_view cp, std::string_view variant) {
  return {make_error(codes::locked_variant,
                     "'" + std::string(variant) + "' is mandatory at '" + std::string(cp) + "'",
                     {std::string(cp), std::string(variant)})};
}

}  // namespace

Expected<DecisionResult> decide(const ConfiguratorSession& session, std::string_view cp, std::string_view variant,
                                Decision value) {
  if (value == Decision::undecided) throw std::invalid_argument("a decision must select or deselect");
  const PairState* st = session.find(cp, variant);
  if (st == nullptr) return unknown_pair(cp, variant);
  if (st->mandatory) return locked(cp, variant);

  const Pair pair{std::string(cp), std::string(variant)};
  if (st->value == value && (st->tenant || st->forced))
    return DecisionResult{session, DecisionReport{{}, session.conflict(), session.mode()}};

  ConfiguratorSession next;
  if (st->tenant) {
    auto decisions = session.tenant_decisions();
    for (auto& [p, d] : decisions)
      if (p == pair) d = value;
    next = SessionEngine::replay(session, decisions);
  } else {
    next = SessionEngine::step(session, pair, value);
  }
  DecisionReport report{newly_forced(session, next), next.conflict(), next.mode()};
  return DecisionResult{std::move(next), std::move(report)};
}

Expected<ConfiguratorSession> retract(const ConfiguratorSession& session, std::string_view cp,
                                      std::string_view variant) {
  const PairState* st = session.find(cp, variant);
  if (st == nullptr) return unknown_pair(cp, variant);
  if (st->mandatory) return locked(cp, variant);
  if (!st->tenant) {
    const std::string why = st->forced ? "' is fixed by propagation" : "' carries no tenant decision";
    return Diagnostics{make_error(codes::retract_of_forced, "'" + std::string(variant) + "' at '" + std::string(cp) + why,
                                  {std::string(cp), std::string(variant)})};
  }
  auto decisions = session.tenant_decisions();
  std::erase_if(decisions, [&](const auto& d) { return d.first.cp == cp && d.first.variant == variant; });
  return SessionEngine::replay(session, decisions);
}

Expected<TenantConfiguration> complete(const ConfiguratorSession& session) {
  TenantConfiguration cfg;
  cfg.model_name = session.model().model.name;
  for (const auto& vp : session.model().model.vps) {
    std::vector<std::string> chosen;
    for (const auto& st : session.pairs())
      if (st.pair.cp == vp.id && st.value == Decision::selected) chosen.push_back(st.pair.variant);
    cfg.selections.emplace_back(vp.id, std::move(chosen));
  }
  Diagnostics diagnostics = validate_configuration(session.model(), cfg);
  if (!diagnostics.empty()) return diagnostics;
  return cfg;
}

}  // namespace ovm::configurator
