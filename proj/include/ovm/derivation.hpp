#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ovm/model.hpp"
#include "ovm/result.hpp"

namespace ovm::derivation {

/// The developer's choices at internal variation points, in declaration
/// order. Order matters: effects of earlier entries fire first.
struct DeveloperBinding {
  std::vector<std::pair<std::string, std::vector<std::string>>> choices;

  const std::vector<std::string>* find(std::string_view vp) const;
  bool operator==(const DeveloperBinding&) const = default;
};

/// A variability model with only external variation points, plus where it
/// came from.
struct CustomizationModel {
  VariabilityModel model;
  std::string source_name;
  DeveloperBinding binding;

  bool operator==(const CustomizationModel&) const = default;
};

/// Wraps a model that already has no internal variation points.
Expected<CustomizationModel> as_customization_model(VariabilityModel model);

// Derivation effects. Together they describe exactly how the customization
// model is obtained from the source model (see `replay`).
struct VariantRemoved {
  std::string variant;
  std::optional<Constraint> cause;
  bool operator==(const VariantRemoved&) const = default;
};
struct VariantPromoted {
  std::string variant;
  std::string vp;
  std::optional<Constraint> cause;
  bool operator==(const VariantPromoted&) const = default;
};
struct CardinalityAdjusted {
  std::string vp;
  Cardinality before;
  Cardinality after;
  bool operator==(const CardinalityAdjusted&) const = default;
};
struct VpDropped {
  std::string vp;
  std::string reason;
  bool operator==(const VpDropped&) const = default;
};
struct ConstraintCarried {
  Constraint constraint;
  bool operator==(const ConstraintCarried&) const = default;
};
struct ConstraintDiscarded {
  Constraint constraint;
  std::string reason;
  bool operator==(const ConstraintDiscarded&) const = default;
};

using Effect =
    std::variant<VariantRemoved, VariantPromoted, CardinalityAdjusted, VpDropped, ConstraintCarried, ConstraintDiscarded>;
using Effects = std::vector<Effect>;
using DerivationTrace = Effects;

std::string describe(const Effect& effect);

struct Derivation {
  CustomizationModel customization;
  DerivationTrace trace;
};

/// Binds every internal variation point, propagates requires/excludes to a
/// fixpoint and returns the customization model offered to tenants.
///
/// Errors: the model's own well-formedness errors, DER001 (binding violates
/// a VP's variants or cardinality), DER002 (an element is both forced in and
/// forced out), DER003 (removals leave a group unable to reach its minimum),
/// DER004 (an internal VP is missing from the binding).
Expected<Derivation> derive(const VariabilityModel& model, const DeveloperBinding& binding);

/// Applies a trace to its source model. For every successful derivation,
/// `replay(source, trace) == derive(source, binding)->customization.model`.
VariabilityModel replay(const VariabilityModel& source, const DerivationTrace& trace);

/// Name given to the customization model derived from `source_name`.
std::string derived_name(std::string_view source_name);

enum class Value { unknown, on, off };

/// Working state of one propagation: a mutable copy of the model and the
/// current value of each variant and variation point. `derive` drives one of
/// these to a fixpoint; it is public so single propagation steps can be
/// exercised directly.
class PropagationState {
 public:
  /// Seeds values from the model alone: mandatory variants of external VPs
  /// are established unless their VP is the target of a requires constraint
  /// (such VPs stay pending until something established requires them).
  explicit PropagationState(VariabilityModel model);

  const VariabilityModel& model() const { return model_; }
  Value value(std::string_view id) const;
  bool is_pending(std::string_view vp) const { return pending_.count(vp) != 0; }
  bool is_retained(std::string_view vp) const { return retained_.count(vp) != 0; }

  /// Marks an element as part of the product without running propagation.
  void establish(std::string_view id);

 private:
  friend Expected<Effects> apply_excludes(PropagationState&, std::string_view, std::string_view);
  friend Expected<Effects> apply_requires(PropagationState&, std::string_view, std::string_view);
  friend Expected<Derivation> derive(const VariabilityModel&, const DeveloperBinding&);

  Expected<Effects> force_off(const std::string& id, const std::optional<Constraint>& cause);
  Expected<Effects> force_on(const std::string& id, const std::optional<Constraint>& cause);
  Expected<Effects> remove_variant(const std::string& id, const std::optional<Constraint>& cause);
  Expected<Effects> drop_vp(const std::string& vp, const std::string& reason);
  Expected<Effects> retain(const std::string& vp, const std::optional<Constraint>& cause);
  Expected<Effects> fire(const Constraint& c);
  Expected<Effects> run_agenda();
  void set_value(const std::string& id, Value v);
  bool has_constraint(ConstraintKind kind, std::string_view a, std::string_view b, bool symmetric) const;

  VariabilityModel model_;
  std::map<std::string, Value, std::less<>> values_;
  std::set<std::string, std::less<>> pending_;
  std::set<std::string, std::less<>> retained_;
  std::set<std::string, std::less<>> vetoed_;
  std::deque<std::string> agenda_;
};

/// `active` excludes `other` (in either direction) and `active` is part of
/// the product: removes `other` (a variant everywhere it is attached, or a VP
/// with its exclusive variants). Throws std::invalid_argument when no such
/// constraint exists.
Expected<Effects> apply_excludes(PropagationState& state, std::string_view active, std::string_view other);

/// `active` requires `needed` and `active` is part of the product: promotes a
/// variant to mandatory (shifting its group's cardinality) or retains a VP.
/// Throws std::invalid_argument when no such constraint exists.
Expected<Effects> apply_requires(PropagationState& state, std::string_view active, std::string_view needed);

}  // namespace ovm::derivation
