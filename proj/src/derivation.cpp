#include "ovm/derivation.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace ovm::derivation {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Diagnostics contradiction(const std::string& id, const std::string& why) {
  return {make_error(codes::contradiction, "'" + id + "' " + why, {id})};
}

std::string cause_text(const std::optional<Constraint>& cause) {
  return cause ? " by '" + ovm::describe(*cause) + "'" : std::string{};
}

bool erase_edge(std::vector<VariantEdge>& edges, std::string_view id) {
  auto it = std::find_if(edges.begin(), edges.end(), [&](const VariantEdge& e) { return e.variant_id == id; });
  if (it == edges.end()) return false;
  edges.erase(it);
  return true;
}

std::optional<VariantEdge> take_edge(std::vector<VariantEdge>& edges, std::string_view id) {
  auto it = std::find_if(edges.begin(), edges.end(), [&](const VariantEdge& e) { return e.variant_id == id; });
  if (it == edges.end()) return std::nullopt;
  VariantEdge edge = std::move(*it);
  edges.erase(it);
  return edge;
}

void promote_edge(VariationPoint& vp, std::string_view id) {
  auto edge = take_edge(vp.optional_edges, id);
  if (!edge && vp.group) edge = take_edge(vp.group->members, id);
  if (!edge) return;
  edge->kind = EdgeKind::mandatory;
  edge->selected = false;
  vp.mandatory_edges.push_back(std::move(*edge));
}

bool same_constraint(const Constraint& a, const Constraint& b) {
  if (a.kind != b.kind) return false;
  if (a.source == b.source && a.target == b.target) return true;
  return a.kind == ConstraintKind::exclude && a.source == b.target && a.target == b.source;
}

// Drops emptied groups and rebuilds the variant list from the surviving VPs.
void finalize(VariabilityModel& m, std::string_view source_name) {
  m.name = derived_name(source_name);
  for (auto& vp : m.vps)
    if (vp.group && vp.group->members.empty()) vp.group.reset();
  canonicalize_variants(m);
  std::erase_if(m.variants, [&](const Variant& v) { return !m.is_attached_variant(v.id); });
}

template <typename T>
bool append(Effects& out, Expected<T>&& step, Diagnostics& error) {
  if (!step) {
    error = std::move(step).error();
    return false;
  }
  auto effects = std::move(step).value();
  out.insert(out.end(), std::make_move_iterator(effects.begin()), std::make_move_iterator(effects.end()));
  return true;
}

#define OVM_TRY_APPEND(out, expr)                       \
  do {                                                  \
    Diagnostics ovm_error_;                             \
    if (!append((out), (expr), ovm_error_)) return ovm_error_; \
  } while (false)

}  // namespace

const std::vector<std::string>* DeveloperBinding::find(std::string_view vp) const {
  for (const auto& [id, chosen] : choices)
    if (id == vp) return &chosen;
  return nullptr;
}

std::string derived_name(std::string_view source_name) { return std::string(source_name) + "-derived"; }

Expected<CustomizationModel> as_customization_model(VariabilityModel model) {
  Diagnostics errors;
  for (const auto& d : well_formed(model))
    if (d.severity == Severity::error) errors.push_back(d);
  for (const auto& vp : model.vps) {
    if (!vp.is_external())
      errors.push_back(make_error(codes::unbound_internal_vp,
                                  "internal variation point '" + vp.id + "' must be bound by derivation first",
                                  {vp.id}));
  }
  if (!errors.empty()) return errors;
  std::string name = model.name;
  return CustomizationModel{std::move(model), std::move(name), {}};
}

std::string describe(const Effect& effect) {
  return std::visit(
      overloaded{
          [](const VariantRemoved& e) { return "variant-removed " + e.variant + cause_text(e.cause); },
          [](const VariantPromoted& e) {
            return "variant-promoted " + e.variant + " at " + e.vp + cause_text(e.cause);
          },
          [](const CardinalityAdjusted& e) {
            return "cardinality-adjusted " + e.vp + " " + format_cardinality(e.before) + " -> " +
                   format_cardinality(e.after);
          },
          [](const VpDropped& e) { return "vp-dropped " + e.vp + " (" + e.reason + ")"; },
          [](const ConstraintCarried& e) { return "constraint-carried " + ovm::describe(e.constraint); },
          [](const ConstraintDiscarded& e) {
            return "constraint-discarded " + ovm::describe(e.constraint) + " (" + e.reason + ")";
          },
      },
      effect);
}

// ---------------------------------------------------------------------------
// PropagationState

PropagationState::PropagationState(VariabilityModel model) : model_(std::move(model)) {
  for (const auto& c : model_.constraints) {
    if (c.kind != ConstraintKind::require) continue;
    if (const VariationPoint* vp = model_.find_vp(c.target); vp && vp->is_external()) pending_.insert(vp->id);
  }
  for (const auto& vp : model_.vps) {
    if (!vp.is_external() || is_pending(vp.id)) continue;
    for (const auto& e : vp.mandatory_edges) {
      if (value(e.variant_id) == Value::unknown) {
        set_value(e.variant_id, Value::on);
        agenda_.push_back(e.variant_id);
      }
    }
    if (!vp.mandatory_edges.empty() || (vp.group && vp.group->min > 0)) {
      set_value(vp.id, Value::on);
      agenda_.push_back(vp.id);
    }
  }
}

Value PropagationState::value(std::string_view id) const {
  auto it = values_.find(id);
  return it == values_.end() ? Value::unknown : it->second;
}

void PropagationState::set_value(const std::string& id, Value v) { values_[id] = v; }

void PropagationState::establish(std::string_view id) { set_value(std::string(id), Value::on); }

bool PropagationState::has_constraint(ConstraintKind kind, std::string_view a, std::string_view b,
                                      bool symmetric) const {
  return std::any_of(model_.constraints.begin(), model_.constraints.end(), [&](const Constraint& c) {
    if (c.kind != kind) return false;
    return (c.source == a && c.target == b) || (symmetric && c.source == b && c.target == a);
  });
}

Expected<Effects> PropagationState::remove_variant(const std::string& id, const std::optional<Constraint>& cause) {
  Effects out{VariantRemoved{id, cause}};
  std::vector<std::string> emptied;
  for (auto& vp : model_.vps) {
    if (!vp.attaches(id)) continue;
    if (vp.is_mandatory(id)) {
      if (!is_pending(vp.id))
        return contradiction(id, "is mandatory at '" + vp.id + "' but is removed" + cause_text(cause));
      vetoed_.insert(vp.id);
      erase_edge(vp.mandatory_edges, id);
    } else if (!erase_edge(vp.optional_edges, id) && vp.group) {
      auto& g = *vp.group;
      const int remaining = static_cast<int>(g.members.size()) - 1;
      if (g.min > remaining) {
        return Diagnostics{make_error(codes::group_void,
                                      "removing '" + id + "'" + cause_text(cause) + " leaves the group of '" + vp.id +
                                          "' with " + std::to_string(remaining) + " member(s), below its minimum " +
                                          std::to_string(g.min),
                                      {vp.id, id})};
      }
      erase_edge(g.members, id);
      const Cardinality before = g.cardinality();
      g.max = std::min(g.max, remaining);
      if (g.cardinality() != before) out.push_back(CardinalityAdjusted{vp.id, before, g.cardinality()});
    }
    if (vp.edge_count() == 0) emptied.push_back(vp.id);
  }
  set_value(id, Value::off);
  agenda_.push_back(id);
  for (const auto& vp : emptied) OVM_TRY_APPEND(out, drop_vp(vp, "no variants left"));
  return out;
}

Expected<Effects> PropagationState::drop_vp(const std::string& vp_id, const std::string& reason) {
  auto it = std::find_if(model_.vps.begin(), model_.vps.end(), [&](const VariationPoint& vp) { return vp.id == vp_id; });
  if (it == model_.vps.end()) return Effects{};
  if (value(vp_id) == Value::on) return contradiction(vp_id, "is part of the product but is dropped (" + reason + ")");
  const VariationPoint dropped = std::move(*it);
  model_.vps.erase(it);
  pending_.erase(vp_id);
  set_value(vp_id, Value::off);
  agenda_.push_back(vp_id);
  for (const auto& id : dropped.variant_ids()) {
    if (model_.is_attached_variant(id)) continue;
    if (value(id) == Value::on) return contradiction(id, "is established but its variation point '" + vp_id + "' is dropped");
    if (value(id) == Value::unknown) {
      set_value(id, Value::off);
      agenda_.push_back(id);
    }
  }
  return Effects{VpDropped{vp_id, reason}};
}

Expected<Effects> PropagationState::retain(const std::string& vp_id, const std::optional<Constraint>& cause) {
  if (vetoed_.count(vp_id) != 0)
    return contradiction(vp_id, "is required" + cause_text(cause) + " but one of its mandatory variants was removed");
  pending_.erase(vp_id);
  retained_.insert(vp_id);
  if (const VariationPoint* vp = model_.find_vp(vp_id)) {
    for (const auto& e : vp->mandatory_edges) {
      if (value(e.variant_id) == Value::off)
        return contradiction(e.variant_id, "is mandatory at required '" + vp_id + "' but was removed");
      if (value(e.variant_id) == Value::unknown) {
        set_value(e.variant_id, Value::on);
        agenda_.push_back(e.variant_id);
      }
    }
  }
  return Effects{};
}

Expected<Effects> PropagationState::force_off(const std::string& id, const std::optional<Constraint>& cause) {
  const Value v = value(id);
  if (v == Value::off) return Effects{};
  if (v == Value::on) return contradiction(id, "is established but is forced out" + cause_text(cause));
  if (const VariationPoint* vp = model_.find_vp(id)) {
    if (!is_pending(id) && (!vp->mandatory_edges.empty() || (vp->group && vp->group->min > 0)))
      return contradiction(id, "is always bound but is excluded" + cause_text(cause));
    return drop_vp(id, "excluded" + cause_text(cause));
  }
  if (!model_.is_attached_variant(id)) {
    set_value(id, Value::off);
    agenda_.push_back(id);
    return Effects{};
  }
  return remove_variant(id, cause);
}

Expected<Effects> PropagationState::force_on(const std::string& id, const std::optional<Constraint>& cause) {
  const Value v = value(id);
  if (v == Value::on) return Effects{};
  if (v == Value::off) return contradiction(id, "was removed but is required" + cause_text(cause));

  Effects out;
  if (model_.find_vp(id) != nullptr) {
    if (is_pending(id)) OVM_TRY_APPEND(out, retain(id, cause));
    retained_.insert(id);
    set_value(id, Value::on);
    agenda_.push_back(id);
    return out;
  }

  auto it = std::find_if(model_.vps.begin(), model_.vps.end(), [&](const VariationPoint& vp) { return vp.attaches(id); });
  if (it == model_.vps.end()) return contradiction(id, "is required" + cause_text(cause) + " but no variation point offers it");
  const std::string vp_id = it->id;
  if (is_pending(vp_id)) OVM_TRY_APPEND(out, retain(vp_id, cause));
  VariationPoint& vp = *model_.find_vp(vp_id);
  if (!vp.is_mandatory(id)) {
    const bool in_group = vp.group && std::any_of(vp.group->members.begin(), vp.group->members.end(),
                                                  [&](const VariantEdge& e) { return e.variant_id == id; });
    const std::optional<Cardinality> before = vp.group ? std::optional(vp.group->cardinality()) : std::nullopt;
    promote_edge(vp, id);
    out.push_back(VariantPromoted{id, vp_id, cause});
    if (in_group) {
      auto& g = *vp.group;
      if (g.max == 0) return contradiction(id, "is required" + cause_text(cause) + " but the group of '" + vp_id + "' is full");
      g.min = std::max(0, g.min - 1);
      g.max = g.max - 1;
      out.push_back(CardinalityAdjusted{vp_id, *before, g.cardinality()});
      // A full group rules out its remaining members.
      if (g.max == 0) {
        const auto rest = g.members;
        for (const auto& e : rest) OVM_TRY_APPEND(out, force_off(e.variant_id, cause));
      }
    }
  }
  if (value(id) != Value::on) {
    set_value(id, Value::on);
    agenda_.push_back(id);
  }
  if (value(vp_id) == Value::unknown) {
    set_value(vp_id, Value::on);
    agenda_.push_back(vp_id);
  }
  return out;
}

Expected<Effects> PropagationState::fire(const Constraint& c) {
  Effects out;
  if (c.kind == ConstraintKind::exclude) {
    if (value(c.source) == Value::on) OVM_TRY_APPEND(out, force_off(c.target, c));
    if (value(c.target) == Value::on) OVM_TRY_APPEND(out, force_off(c.source, c));
  } else {
    if (value(c.source) == Value::on) OVM_TRY_APPEND(out, force_on(c.target, c));
    // contrapositive: a removed target rules its source out
    if (value(c.target) == Value::off) OVM_TRY_APPEND(out, force_off(c.source, c));
  }
  return out;
}

Expected<Effects> PropagationState::run_agenda() {
  Effects out;
  while (!agenda_.empty()) {
    const std::string id = agenda_.front();
    agenda_.pop_front();
    for (std::size_t i = 0; i < model_.constraints.size(); ++i) {
      const Constraint c = model_.constraints[i];
      if (c.mentions(id)) OVM_TRY_APPEND(out, fire(c));
    }
  }
  return out;
}

Expected<Effects> apply_excludes(PropagationState& state, std::string_view active, std::string_view other) {
  if (!state.has_constraint(ConstraintKind::exclude, active, other, true))
    throw std::invalid_argument("no excludes constraint between '" + std::string(active) + "' and '" +
                                std::string(other) + "'");
  const Constraint cause{ConstraintKind::exclude, std::string(active), std::string(other)};
  auto it = std::find_if(state.model_.constraints.begin(), state.model_.constraints.end(), [&](const Constraint& c) {
    return c.kind == ConstraintKind::exclude && c.mentions(active) && c.mentions(other);
  });
  return state.force_off(std::string(other), it != state.model_.constraints.end() ? *it : cause);
}

Expected<Effects> apply_requires(PropagationState& state, std::string_view active, std::string_view needed) {
  if (!state.has_constraint(ConstraintKind::require, active, needed, false))
    throw std::invalid_argument("no requires constraint from '" + std::string(active) + "' to '" +
                                std::string(needed) + "'");
  return state.force_on(std::string(needed), Constraint{ConstraintKind::require, std::string(active), std::string(needed)});
}

// ---------------------------------------------------------------------------
// derive

namespace {

Diagnostics check_binding(const VariabilityModel& model, const DeveloperBinding& binding) {
  Diagnostics out;
  std::unordered_set<std::string> seen;
  for (const auto& [vp_id, chosen] : binding.choices) {
    const VariationPoint* vp = model.find_vp(vp_id);
    if (vp == nullptr || vp->is_external()) {
      out.push_back(make_error(codes::binding_cardinality, "'" + vp_id + "' is not an internal variation point", {vp_id}));
      continue;
    }
    if (!seen.insert(vp_id).second) {
      out.push_back(make_error(codes::binding_cardinality, "'" + vp_id + "' is bound more than once", {vp_id}));
      continue;
    }
    for (const auto& id : chosen) {
      if (!vp->attaches(id))
        out.push_back(make_error(codes::binding_cardinality,
                                 "'" + id + "' is not a variant of '" + vp_id + "'", {vp_id, id}));
    }
    if (vp->group) {
      const auto& g = *vp->group;
      std::unordered_set<std::string> picked(chosen.begin(), chosen.end());
      const int count = static_cast<int>(std::count_if(g.members.begin(), g.members.end(), [&](const VariantEdge& e) {
        return picked.count(e.variant_id) != 0;
      }));
      if (count < g.min || count > g.max) {
        out.push_back(make_error(codes::binding_cardinality,
                                 "binding chooses " + std::to_string(count) + " member(s) of the group of '" + vp_id +
                                     "', outside " + format_cardinality(g.cardinality()),
                                 {vp_id}));
      }
    }
  }
  for (const auto& vp : model.vps) {
    if (!vp.is_external() && seen.count(vp.id) == 0 && binding.find(vp.id) == nullptr)
      out.push_back(make_error(codes::unbound_internal_vp, "internal variation point '" + vp.id + "' is not bound",
                               {vp.id}));
  }
  return out;
}

}  // namespace

Expected<Derivation> derive(const VariabilityModel& model, const DeveloperBinding& binding) {
  Diagnostics structural = well_formed(model);
  if (has_errors(structural)) {
    std::erase_if(structural, [](const Diagnostic& d) { return d.severity != Severity::error; });
    return structural;
  }
  if (Diagnostics errors = check_binding(model, binding); !errors.empty()) return errors;

  PropagationState state(model);
  std::deque<std::string> seeded = std::move(state.agenda_);
  state.agenda_.clear();
  Effects trace;

  for (const auto& [vp_id, chosen_list] : binding.choices) {
    const VariationPoint vp = *state.model_.find_vp(vp_id);
    std::unordered_set<std::string> chosen(chosen_list.begin(), chosen_list.end());
    for (const auto& e : vp.mandatory_edges) chosen.insert(e.variant_id);

    std::string picked;
    for (const auto& id : vp.variant_ids()) {
      if (chosen.count(id) == 0) continue;
      picked += picked.empty() ? id : "," + id;
    }
    std::erase_if(state.model_.vps, [&](const VariationPoint& p) { return p.id == vp_id; });
    trace.push_back(VpDropped{vp_id, "bound to {" + picked + "}"});

    for (const auto& id : vp.variant_ids()) {
      if (chosen.count(id) != 0) {
        if (state.value(id) == Value::off) return contradiction(id, "is chosen at '" + vp_id + "' but was ruled out");
        if (state.value(id) != Value::on) {
          state.set_value(id, Value::on);
          state.agenda_.push_back(id);
        }
      } else if (state.value(id) == Value::unknown && !state.model_.is_attached_variant(id)) {
        state.set_value(id, Value::off);
        state.agenda_.push_back(id);
      }
    }
    state.set_value(vp_id, chosen.empty() ? Value::off : Value::on);
    state.agenda_.push_back(vp_id);
  }
  state.agenda_.insert(state.agenda_.end(), seeded.begin(), seeded.end());

  OVM_TRY_APPEND(trace, state.run_agenda());

  // A pending VP stays while something that may still be chosen requires it.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : state.model_.constraints) {
      if (c.kind != ConstraintKind::require || !state.is_pending(c.target)) continue;
      if (state.value(c.source) == Value::off) continue;
      OVM_TRY_APPEND(trace, state.retain(c.target, c));
      OVM_TRY_APPEND(trace, state.run_agenda());
      changed = true;
      break;
    }
  }

  std::vector<std::string> unrequired;
  for (const auto& vp : state.model_.vps)
    if (state.is_pending(vp.id)) unrequired.push_back(vp.id);
  for (const auto& vp : unrequired) OVM_TRY_APPEND(trace, state.drop_vp(vp, "not required by the binding"));
  OVM_TRY_APPEND(trace, state.run_agenda());

  VariabilityModel out = state.model_;
  out.constraints.clear();
  auto survives = [&](const std::string& id) { return out.is_vp(id) || out.is_attached_variant(id); };
  for (const auto& c : model.constraints) {
    if (!survives(c.source) || !survives(c.target)) {
      const std::string& gone = survives(c.source) ? c.target : c.source;
      trace.push_back(ConstraintDiscarded{c, "'" + gone + "' is not in the customization model"});
    } else if (std::any_of(out.constraints.begin(), out.constraints.end(),
                           [&](const Constraint& kept) { return same_constraint(kept, c); })) {
      trace.push_back(ConstraintDiscarded{c, "duplicate"});
    } else {
      out.constraints.push_back(c);
      trace.push_back(ConstraintCarried{c});
    }
  }
  finalize(out, model.name);

  if (Diagnostics check = well_formed(out); has_errors(check)) return check;
  return Derivation{CustomizationModel{std::move(out), model.name, binding}, std::move(trace)};
}

VariabilityModel replay(const VariabilityModel& source, const DerivationTrace& trace) {
  VariabilityModel m = source;
  m.constraints.clear();
  for (const auto& effect : trace) {
    std::visit(overloaded{
                   [&](const VariantRemoved& e) {
                     for (auto& vp : m.vps) {
                       erase_edge(vp.mandatory_edges, e.variant);
                       erase_edge(vp.optional_edges, e.variant);
                       if (vp.group) erase_edge(vp.group->members, e.variant);
                     }
                   },
                   [&](const VariantPromoted& e) {
                     if (VariationPoint* vp = m.find_vp(e.vp)) promote_edge(*vp, e.variant);
                   },
                   [&](const CardinalityAdjusted& e) {
                     if (VariationPoint* vp = m.find_vp(e.vp); vp && vp->group) {
                       vp->group->min = e.after.min;
                       vp->group->max = e.after.max;
                     }
                   },
                   [&](const VpDropped& e) {
                     std::erase_if(m.vps, [&](const VariationPoint& vp) { return vp.id == e.vp; });
                   },
                   [&](const ConstraintCarried& e) { m.constraints.push_back(e.constraint); },
                   [](const ConstraintDiscarded&) {},
               },
               effect);
  }
  finalize(m, source.name);
  return m;
}

}  // namespace ovm::derivation
