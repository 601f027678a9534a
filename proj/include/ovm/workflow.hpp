#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ovm/configurator.hpp"
#include "ovm/derivation.hpp"
#include "ovm/model.hpp"
#include "ovm/result.hpp"

namespace ovm::workflow {

enum class NodeKind { action, initial, final, decision, merge, vp_region };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

struct Region;

struct ActivityNode {
  std::string id;
  NodeKind kind = NodeKind::action;
  std::string vp;               // vp_region, and decision/merge nodes built for a CP
  std::vector<Region> regions;  // vp_region only, keyed by variant id

  const Region* region(std::string_view variant) const;
  bool operator==(const ActivityNode& other) const;
};

struct ActivityEdge {
  std::string from;
  std::string to;
  std::optional<std::string> guard;
  std::optional<std::string> variant;  // branch a CP decision edge leads into

  bool operator==(const ActivityEdge&) const = default;
};

/// A control-flow graph. Top-level graphs run from an initial node (`entry`)
/// to a final node (`exit`). Region fragments use the same shape without
/// initial/final nodes: `entry` and `exit` name their first and last nodes.
struct ActivityGraph {
  std::string entry;
  std::string exit;
  std::vector<ActivityNode> nodes;
  std::vector<ActivityEdge> edges;

  const ActivityNode* find(std::string_view id) const;
  bool operator==(const ActivityGraph&) const = default;
};

struct Region {
  std::string variant;
  ActivityGraph fragment;

  bool operator==(const Region&) const = default;
};

/// Structural and model checks. WF001 unknown VP, WF002 region keyed by a
/// variant the VP does not offer, WF003 unreachable nodes and other broken
/// structure, WF004 missing or extra initial/final node.
Diagnostics validate_workflow(const ActivityGraph& graph, const VariabilityModel& model);

/// Graph invariants alone (no model): what every resolved graph satisfies.
Diagnostics validate_structure(const ActivityGraph& graph);

/// Replaces every vp_region: bound internal VPs are spliced in binding
/// order, surviving CPs become decision/merge pairs with one guarded edge per
/// surviving variant (a single branch is spliced directly), dropped CPs are
/// removed. WF005 when every region of a CP was removed, WF006 when the
/// trace and customization model do not account for a region.
Expected<ActivityGraph> resolve_workflow(const ActivityGraph& graph, const derivation::CustomizationModel& cm,
                                         const derivation::DerivationTrace& trace);

/// Prunes CP branches the configuration does not select. WF007 when the
/// configuration does not validate against the customization model.
Expected<ActivityGraph> apply_configuration(const ActivityGraph& resolved, const configurator::TenantConfiguration& cfg,
                                            const derivation::CustomizationModel& cm);

/// Isomorphism up to node ids of decision and merge nodes. Action, initial
/// and final nodes are matched by id; edges by guard and variant label.
bool isomorphic(const ActivityGraph& a, const ActivityGraph& b);

/// Action node ids of the graph and, recursively, of its region fragments.
std::vector<std::string> action_ids(const ActivityGraph& graph);

}  // namespace ovm::workflow
