#include "ovm/model.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace ovm {

std::vector<std::string> VariationPoint::variant_ids() const {
  std::vector<std::string> ids;
  ids.reserve(edge_count());
  for (const auto& e : mandatory_edges) ids.push_back(e.variant_id);
  for (const auto& e : optional_edges) ids.push_back(e.variant_id);
  if (group)
    for (const auto& e : group->members) ids.push_back(e.variant_id);
  return ids;
}

const VariantEdge* VariationPoint::find_edge(std::string_view variant_id) const {
  for (const auto& e : mandatory_edges)
    if (e.variant_id == variant_id) return &e;
  for (const auto& e : optional_edges)
    if (e.variant_id == variant_id) return &e;
  if (group)
    for (const auto& e : group->members)
      if (e.variant_id == variant_id) return &e;
  return nullptr;
}

bool VariationPoint::attaches(std::string_view variant_id) const { return find_edge(variant_id) != nullptr; }

bool VariationPoint::is_mandatory(std::string_view variant_id) const {
  return std::any_of(mandatory_edges.begin(), mandatory_edges.end(),
                     [&](const VariantEdge& e) { return e.variant_id == variant_id; });
}

std::size_t VariationPoint::edge_count() const {
  return mandatory_edges.size() + optional_edges.size() + (group ? group->members.size() : 0);
}

const VariationPoint* VariabilityModel::find_vp(std::string_view id) const {
  auto it = std::find_if(vps.begin(), vps.end(), [&](const VariationPoint& vp) { return vp.id == id; });
  return it == vps.end() ? nullptr : &*it;
}

VariationPoint* VariabilityModel::find_vp(std::string_view id) {
  auto it = std::find_if(vps.begin(), vps.end(), [&](const VariationPoint& vp) { return vp.id == id; });
  return it == vps.end() ? nullptr : &*it;
}

const Variant* VariabilityModel::find_variant(std::string_view id) const {
  auto it = std::find_if(variants.begin(), variants.end(), [&](const Variant& v) { return v.id == id; });
  return it == variants.end() ? nullptr : &*it;
}

bool VariabilityModel::is_attached_variant(std::string_view id) const {
  return std::any_of(vps.begin(), vps.end(), [&](const VariationPoint& vp) { return vp.attaches(id); });
}

bool VariabilityModel::has_internal_vps() const {
  return std::any_of(vps.begin(), vps.end(), [](const VariationPoint& vp) { return !vp.is_external(); });
}

void canonicalize_variants(VariabilityModel& model) {
  std::vector<Variant> ordered;
  std::unordered_set<std::string> seen;
  for (const auto& vp : model.vps) {
    for (const auto& id : vp.variant_ids()) {
      if (!seen.insert(id).second) continue;
      if (const Variant* known = model.find_variant(id))
        ordered.push_back(*known);
      else
        ordered.push_back(Variant{id, id, std::nullopt});
    }
  }
  for (const auto& v : model.variants)
    if (seen.insert(v.id).second) ordered.push_back(v);
  model.variants = std::move(ordered);
}

std::string_view to_string(Visibility v) { return v == Visibility::internal ? "internal" : "external"; }

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::process: return "process";
    case Layer::service: return "service";
    case Layer::component: return "component";
  }
  return "process";
}

std::string_view to_string(EdgeKind kind) { return kind == EdgeKind::mandatory ? "mandatory" : "optional"; }

std::string_view to_string(ConstraintKind kind) { return kind == ConstraintKind::require ? "requires" : "excludes"; }

std::optional<Layer> parse_layer(std::string_view text) {
  if (text == "process") return Layer::process;
  if (text == "service") return Layer::service;
  if (text == "component") return Layer::component;
  return std::nullopt;
}

std::string format_cardinality(Cardinality c) {
  return "[" + std::to_string(c.min) + ".." + std::to_string(c.max) + "]";
}

std::string describe(const Constraint& c) {
  return c.source + " " + std::string(to_string(c.kind)) + " " + c.target;
}

namespace {

bool same_constraint(const Constraint& a, const Constraint& b) {
  if (a.kind != b.kind) return false;
  if (a.source == b.source && a.target == b.target) return true;
  // excludes is symmetric
  return a.kind == ConstraintKind::exclude && a.source == b.target && a.target == b.source;
}

void check_edge(const VariabilityModel& model, const VariationPoint& vp, const VariantEdge& edge,
                std::set<std::string>& seen_in_vp, Diagnostics& out) {
  if (!seen_in_vp.insert(edge.variant_id).second) {
    out.push_back(make_error(codes::duplicate_edge,
                             "variant '" + edge.variant_id + "' attached more than once to '" + vp.id + "'",
                             {vp.id, edge.variant_id}));
  }
  if (edge.guard && edge.guard->empty()) {
    out.push_back(make_error(codes::empty_guard,
                             "empty guard on edge '" + vp.id + "' -> '" + edge.variant_id + "'",
                             {vp.id, edge.variant_id}));
  }
  if (model.find_variant(edge.variant_id) == nullptr) {
    out.push_back(make_error(codes::dangling_reference,
                             "variation point '" + vp.id + "' references undeclared variant '" + edge.variant_id + "'",
                             {vp.id, edge.variant_id}));
  }
}

}  // namespace

Diagnostics well_formed(const VariabilityModel& model) {
  Diagnostics out;
  std::unordered_set<std::string> vp_ids;

  for (const auto& vp : model.vps) {
    if (vp.id.empty()) {
      out.push_back(make_error(codes::duplicate_id, "variation point with empty id"));
    } else if (!vp_ids.insert(vp.id).second) {
      out.push_back(make_error(codes::duplicate_id, "duplicate id '" + vp.id + "'", {vp.id}));
    }
    if (vp.edge_count() == 0) {
      out.push_back(make_error(codes::vp_without_variants,
                               "variation point '" + vp.id + "' has no variants", {vp.id}));
    }
    if (vp.group) {
      const auto& g = *vp.group;
      const int members = static_cast<int>(g.members.size());
      if (members == 0 || g.min < 0 || g.min > g.max || g.max > members) {
        out.push_back(make_error(codes::bad_cardinality,
                                 "group of '" + vp.id + "' has cardinality " + format_cardinality(g.cardinality()) +
                                     " over " + std::to_string(members) + " member(s)",
                                 {vp.id}));
      }
    }
    std::set<std::string> seen_in_vp;
    for (const auto& e : vp.mandatory_edges) check_edge(model, vp, e, seen_in_vp, out);
    for (const auto& e : vp.optional_edges) check_edge(model, vp, e, seen_in_vp, out);
    if (vp.group)
      for (const auto& e : vp.group->members) check_edge(model, vp, e, seen_in_vp, out);
  }

  std::unordered_set<std::string> variant_ids;
  for (const auto& v : model.variants) {
    if (v.id.empty()) {
      out.push_back(make_error(codes::duplicate_id, "variant with empty id"));
      continue;
    }
    if (vp_ids.count(v.id) != 0 || !variant_ids.insert(v.id).second) {
      out.push_back(make_error(codes::duplicate_id, "duplicate id '" + v.id + "'", {v.id}));
    }
    if (!model.is_attached_variant(v.id)) {
      out.push_back(make_error(codes::variant_unreferenced,
                               "variant '" + v.id + "' is not attached to any variation point", {v.id}));
    }
  }

  auto resolves = [&](const std::string& id) { return vp_ids.count(id) != 0 || variant_ids.count(id) != 0; };

  for (std::size_t i = 0; i < model.constraints.size(); ++i) {
    const auto& c = model.constraints[i];
    if (c.source == c.target) {
      out.push_back(make_error(codes::self_constraint, "constraint '" + describe(c) + "' relates an element to itself",
                               {c.source}));
    }
    for (const auto* end : {&c.source, &c.target}) {
      if (!resolves(*end)) {
        out.push_back(make_error(codes::dangling_reference,
                                 "constraint '" + describe(c) + "' references unknown id '" + *end + "'", {*end}));
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (same_constraint(model.constraints[j], c)) {
        out.push_back(make_warning(codes::duplicate_edge, "duplicate constraint '" + describe(c) + "'",
                                   {c.source, c.target}));
        break;
      }
    }
    if (c.kind == ConstraintKind::exclude) {
      for (const auto* end : {&c.source, &c.target}) {
        const VariationPoint* vp = model.find_vp(*end);
        if (vp && !vp->mandatory_edges.empty() && c.source != c.target) {
          out.push_back(make_warning(codes::self_constraint,
                                     "'" + describe(c) + "' excludes a variation point that is always bound",
                                     {*end}));
        }
      }
    }
  }
  return out;
}

bool is_well_formed(const VariabilityModel& model) { return !has_errors(well_formed(model)); }

Expected<std::vector<Reference>> referenced_by(const VariabilityModel& model, std::string_view id) {
  if (!model.is_vp(id) && !model.is_attached_variant(id)) {
    return Diagnostics{make_error(codes::dangling_reference, "unknown id '" + std::string(id) + "'",
                                  {std::string(id)})};
  }
  std::vector<Reference> refs;
  for (const auto& vp : model.vps) {
    auto scan = [&](const std::vector<VariantEdge>& edges, ReferenceKind kind, std::string_view label) {
      for (const auto& e : edges) {
        if (e.variant_id == id) {
          refs.push_back(Reference{kind, vp.id, 0, vp.id + "." + std::string(label)});
          return;
        }
      }
    };
    scan(vp.mandatory_edges, ReferenceKind::mandatory_edge, "mandatory");
    scan(vp.optional_edges, ReferenceKind::optional_edge, "optional");
    if (vp.group) scan(vp.group->members, ReferenceKind::group_member, "group");
  }
  for (std::size_t i = 0; i < model.constraints.size(); ++i) {
    const auto& c = model.constraints[i];
    if (c.mentions(id)) refs.push_back(Reference{ReferenceKind::constraint, {}, i, "constraint " + describe(c)});
  }
  return refs;
}

}  // namespace ovm
