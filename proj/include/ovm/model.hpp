#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ovm/diagnostic.hpp"
#include "ovm/result.hpp"

namespace ovm {

enum class Visibility { internal, external };
enum class Layer { process, service, component };
enum class EdgeKind { mandatory, optional };
enum class ConstraintKind { require, exclude };

struct VariantEdge {
  std::string variant_id;
  EdgeKind kind = EdgeKind::optional;
  // Meaningful only for optional edges; mandatory edges are selected by definition.
  bool selected = false;
  std::optional<std::string> guard;

  bool operator==(const VariantEdge&) const = default;
};

struct Cardinality {
  int min = 0;
  int max = 0;

  bool operator==(const Cardinality&) const = default;
};

/// Alternative choice: at least `min` and at most `max` members are chosen.
struct AlternativeGroup {
  int min = 0;
  int max = 0;
  std::vector<VariantEdge> members;

  Cardinality cardinality() const { return {min, max}; }
  bool operator==(const AlternativeGroup&) const = default;
};

struct VariationPoint {
  std::string id;
  Visibility visibility = Visibility::internal;
  Layer layer = Layer::process;
  std::vector<VariantEdge> mandatory_edges;
  std::vector<VariantEdge> optional_edges;
  std::optional<AlternativeGroup> group;

  bool is_external() const { return visibility == Visibility::external; }

  /// Attached variant ids: mandatory edges, then group-less optional edges,
  /// then group members.
  std::vector<std::string> variant_ids() const;
  bool attaches(std::string_view variant_id) const;
  bool is_mandatory(std::string_view variant_id) const;
  const VariantEdge* find_edge(std::string_view variant_id) const;
  std::size_t edge_count() const;

  bool operator==(const VariationPoint&) const = default;
};

struct Variant {
  std::string id;
  std::string display_name;
  std::optional<std::string> description;

  bool operator==(const Variant&) const = default;
};

/// Cross-tree constraint. Endpoints name either a variant or a variation point.
struct Constraint {
  ConstraintKind kind = ConstraintKind::require;
  std::string source;
  std::string target;

  bool mentions(std::string_view id) const { return source == id || target == id; }
  bool operator==(const Constraint&) const = default;
};

struct VariabilityModel {
  std::string name;
  std::vector<VariationPoint> vps;
  std::vector<Variant> variants;
  std::vector<Constraint> constraints;

  const VariationPoint* find_vp(std::string_view id) const;
  VariationPoint* find_vp(std::string_view id);
  const Variant* find_variant(std::string_view id) const;

  bool is_vp(std::string_view id) const { return find_vp(id) != nullptr; }
  /// True when some variation point attaches the variant.
  bool is_attached_variant(std::string_view id) const;
  bool has_internal_vps() const;

  bool operator==(const VariabilityModel&) const = default;
};

/// Rebuilds `variants` in first-mention order over the variation points,
/// keeping display data of already-declared variants and appending any that
/// no variation point attaches. Parsing produces exactly this order.
void canonicalize_variants(VariabilityModel& model);

std::string_view to_string(Visibility v);
std::string_view to_string(Layer layer);
std::string_view to_string(EdgeKind kind);
std::string_view to_string(ConstraintKind kind);
std::optional<Layer> parse_layer(std::string_view text);

std::string format_cardinality(Cardinality c);
std::string describe(const Constraint& c);

// ---------------------------------------------------------------------------
// Structural checks

/// Checks every structural invariant of the model. Violations come back in
/// declaration order; the function never throws.
Diagnostics well_formed(const VariabilityModel& model);

/// True when `well_formed` reports no error-severity diagnostic.
bool is_well_formed(const VariabilityModel& model);

enum class ReferenceKind { mandatory_edge, optional_edge, group_member, constraint };

struct Reference {
  ReferenceKind kind = ReferenceKind::constraint;
  std::string vp;                    // owning VP for edge references
  std::size_t constraint_index = 0;  // index into model.constraints
  std::string text;                  // e.g. "CP1.group" or "constraint V1 excludes V3"

  bool operator==(const Reference&) const = default;
};

/// Reverse index: every VP edge, group and constraint mentioning `id`.
/// Fails for ids that are neither a VP nor a variant attached to some VP.
Expected<std::vector<Reference>> referenced_by(const VariabilityModel& model, std::string_view id);

}  // namespace ovm
