#include "ovm/workflow.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace ovm::workflow {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::action: return "action";
    case NodeKind::initial: return "initial";
    case NodeKind::final: return "final";
    case NodeKind::decision: return "decision";
    case NodeKind::merge: return "merge";
    case NodeKind::vp_region: return "vp_region";
  }
  return "action";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (auto k : {NodeKind::action, NodeKind::initial, NodeKind::final, NodeKind::decision, NodeKind::merge,
                 NodeKind::vp_region})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

const Region* ActivityNode::region(std::string_view variant) const {
  for (const auto& r : regions)
    if (r.variant == variant) return &r;
  return nullptr;
}

bool ActivityNode::operator==(const ActivityNode& other) const {
  return id == other.id && kind == other.kind && vp == other.vp && regions == other.regions;
}

const ActivityNode* ActivityGraph::find(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<std::string> action_ids(const ActivityGraph& graph) {
  std::vector<std::string> out;
  for (const auto& n : graph.nodes) {
    if (n.kind == NodeKind::action) out.push_back(n.id);
    for (const auto& r : n.regions) {
      auto inner = action_ids(r.fragment);
      out.insert(out.end(), inner.begin(), inner.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

std::set<std::string> reach(const ActivityGraph& g, const std::string& start, bool forward) {
  std::unordered_map<std::string, std::vector<std::string>> next;
  for (const auto& e : g.edges) {
    if (forward)
      next[e.from].push_back(e.to);
    else
      next[e.to].push_back(e.from);
  }
  std::set<std::string> seen{start};
  std::deque<std::string> queue{start};
  while (!queue.empty()) {
    auto id = queue.front();
    queue.pop_front();
    for (const auto& n : next[id])
      if (seen.insert(n).second) queue.push_back(n);
  }
  return seen;
}

class Checker {
 public:
  explicit Checker(const VariabilityModel* model) : model_(model) {}

  void check(const ActivityGraph& g, bool top, const std::string& where) {
    if (top) {
      const auto initials = std::count_if(g.nodes.begin(), g.nodes.end(), [](const ActivityNode& n) {
        return n.kind == NodeKind::initial;
      });
      const auto finals = std::count_if(g.nodes.begin(), g.nodes.end(), [](const ActivityNode& n) {
        return n.kind == NodeKind::final;
      });
      if (initials != 1)
        error(codes::missing_initial_or_final, "graph has " + std::to_string(initials) + " initial nodes", {});
      if (finals != 1) error(codes::missing_initial_or_final, "graph has " + std::to_string(finals) + " final nodes", {});
      const ActivityNode* entry = g.find(g.entry);
      const ActivityNode* exit = g.find(g.exit);
      if (entry == nullptr || entry->kind != NodeKind::initial)
        error(codes::missing_initial_or_final, "entry '" + g.entry + "' is not an initial node", {g.entry});
      if (exit == nullptr || exit->kind != NodeKind::final)
        error(codes::missing_initial_or_final, "exit '" + g.exit + "' is not a final node", {g.exit});
    } else {
      if (g.nodes.empty()) error(codes::unreachable_node, where + " is empty", {});
      if (g.find(g.entry) == nullptr) error(codes::unreachable_node, where + " entry '" + g.entry + "' is not a node", {g.entry});
      if (g.find(g.exit) == nullptr) error(codes::unreachable_node, where + " exit '" + g.exit + "' is not a node", {g.exit});
    }

    std::unordered_map<std::string, int> in_degree;
    std::unordered_map<std::string, int> out_degree;
    for (const auto& n : g.nodes) {
      if (!ids_.insert(n.id).second) error(codes::unreachable_node, "duplicate node id '" + n.id + "'", {n.id});
      if (!top && (n.kind == NodeKind::initial || n.kind == NodeKind::final))
        error(codes::unreachable_node, where + " contains " + std::string(to_string(n.kind)) + " node '" + n.id + "'",
              {n.id});
    }
    for (const auto& e : g.edges) {
      for (const auto* end : {&e.from, &e.to})
        if (g.find(*end) == nullptr)
          error(codes::unreachable_node, "edge " + e.from + " -> " + e.to + " names unknown node '" + *end + "'", {*end});
      ++out_degree[e.from];
      ++in_degree[e.to];
    }
    for (const auto& n : g.nodes) {
      if (n.kind == NodeKind::initial && in_degree[n.id] > 0)
        error(codes::unreachable_node, "initial node '" + n.id + "' has incoming edges", {n.id});
      if (n.kind == NodeKind::final && out_degree[n.id] > 0)
        error(codes::unreachable_node, "final node '" + n.id + "' has outgoing edges", {n.id});
      if (n.kind == NodeKind::decision && out_degree[n.id] < 2)
        error(codes::unreachable_node, "decision node '" + n.id + "' has fewer than 2 outgoing edges", {n.id});
      if (n.kind == NodeKind::merge && in_degree[n.id] < 2)
        error(codes::unreachable_node, "merge node '" + n.id + "' has fewer than 2 incoming edges", {n.id});
    }

    if (g.find(g.entry) != nullptr) {
      const auto seen = reach(g, g.entry, true);
      for (const auto& n : g.nodes)
        if (seen.count(n.id) == 0)
          error(codes::unreachable_node, "node '" + n.id + "' has no path from '" + g.entry + "'", {n.id});
    }
    if (g.find(g.exit) != nullptr) {
      const auto seen = reach(g, g.exit, false);
      for (const auto& n : g.nodes)
        if (seen.count(n.id) == 0)
          error(codes::unreachable_node, "node '" + n.id + "' has no path to '" + g.exit + "'", {n.id});
    }

    for (const auto& n : g.nodes) {
      if (n.kind != NodeKind::vp_region) {
        if (!n.regions.empty()) error(codes::unreachable_node, "node '" + n.id + "' is not a vp_region but has regions", {n.id});
        continue;
      }
      if (!top) {
        error(codes::unreachable_node, "nested vp_region '" + n.id + "' inside " + where, {n.id});
        continue;
      }
      check_region(n);
    }
  }

  Diagnostics take() { return std::move(out_); }

 private:
  void check_region(const ActivityNode& n) {
    const VariationPoint* vp = model_ ? model_->find_vp(n.vp) : nullptr;
    if (model_ != nullptr && vp == nullptr)
      error(codes::unknown_vp, "vp_region '" + n.id + "' references unknown variation point '" + n.vp + "'", {n.id, n.vp});
    std::set<std::string> keys;
    for (const auto& r : n.regions) {
      if (!keys.insert(r.variant).second)
        error(codes::region_variant_mismatch, "vp_region '" + n.id + "' has two regions for '" + r.variant + "'",
              {n.id, r.variant});
      else if (vp != nullptr && !vp->attaches(r.variant))
        error(codes::region_variant_mismatch, "'" + r.variant + "' is not a variant of '" + n.vp + "'", {n.id, r.variant});
      check(r.fragment, false, "region " + n.id + "/" + r.variant);
    }
  }

  void error(std::string_view code, std::string message, std::vector<std::string> subject) {
    out_.push_back(make_error(code, std::move(message), std::move(subject)));
  }

  const VariabilityModel* model_;
  std::unordered_set<std::string> ids_;
  Diagnostics out_;
};

}  // namespace

Diagnostics validate_workflow(const ActivityGraph& graph, const VariabilityModel& model) {
  Checker checker(&model);
  checker.check(graph, true, "graph");
  return checker.take();
}

Diagnostics validate_structure(const ActivityGraph& graph) {
  Checker checker(nullptr);
  checker.check(graph, true, "graph");
  return checker.take();
}

// ---------------------------------------------------------------------------
// Resolution

namespace {

/// What a vp_region turns into. `bypass` means nothing: predecessors connect
/// straight to successors.
struct Replacement {
  bool bypass = true;
  std::string entry;
  std::string exit;
  std::vector<ActivityNode> nodes;
  std::vector<ActivityEdge> edges;
};

Replacement chain(const std::vector<const ActivityGraph*>& fragments) {
  Replacement r;
  for (const ActivityGraph* f : fragments) {
    if (r.bypass) {
      r.bypass = false;
      r.entry = f->entry;
    } else {
      r.edges.push_back(ActivityEdge{r.exit, f->entry, std::nullopt, std::nullopt});
    }
    r.nodes.insert(r.nodes.end(), f->nodes.begin(), f->nodes.end());
    r.edges.insert(r.edges.end(), f->edges.begin(), f->edges.end());
    r.exit = f->exit;
  }
  return r;
}

struct Branch {
  std::string variant;
  std::optional<std::string> guard;
  const ActivityGraph* fragment;
};

Replacement choice(const std::string& region_id, const std::string& cp, const std::vector<Branch>& branches) {
  Replacement r;
  r.bypass = false;
  r.entry = region_id + "_decision";
  r.exit = region_id + "_merge";
  r.nodes.push_back(ActivityNode{r.entry, NodeKind::decision, cp, {}});
  for (const auto& b : branches) {
    r.edges.push_back(ActivityEdge{r.entry, b.fragment->entry, b.guard, b.variant});
    r.nodes.insert(r.nodes.end(), b.fragment->nodes.begin(), b.fragment->nodes.end());
    r.edges.insert(r.edges.end(), b.fragment->edges.begin(), b.fragment->edges.end());
    r.edges.push_back(ActivityEdge{b.fragment->exit, r.exit, std::nullopt, b.variant});
  }
  r.nodes.push_back(ActivityNode{r.exit, NodeKind::merge, cp, {}});
  return r;
}

/// Rebuilds `g` with each listed node replaced. Replaced nodes must not be
/// the graph's entry or exit.
ActivityGraph splice(const ActivityGraph& g, const std::map<std::string, Replacement>& replaced) {
  ActivityGraph out;
  out.entry = g.entry;
  out.exit = g.exit;
  std::set<std::string> bypassed;
  for (const auto& n : g.nodes) {
    auto it = replaced.find(n.id);
    if (it == replaced.end()) {
      out.nodes.push_back(n);
    } else if (it->second.bypass) {
      out.nodes.push_back(ActivityNode{n.id, NodeKind::action, {}, {}});
      bypassed.insert(n.id);
    } else {
      out.nodes.insert(out.nodes.end(), it->second.nodes.begin(), it->second.nodes.end());
      out.edges.insert(out.edges.end(), it->second.edges.begin(), it->second.edges.end());
    }
  }
  for (auto e : g.edges) {
    if (auto it = replaced.find(e.from); it != replaced.end() && !it->second.bypass) e.from = it->second.exit;
    if (auto it = replaced.find(e.to); it != replaced.end() && !it->second.bypass) e.to = it->second.entry;
    out.edges.push_back(std::move(e));
  }

  // Bypassed nodes: connect every predecessor to every successor, one node
  // at a time so runs of bypassed nodes collapse too.
  for (const auto& id : bypassed) {
    std::vector<ActivityEdge> in;
    std::vector<ActivityEdge> outgoing;
    std::vector<ActivityEdge> kept;
    for (auto& e : out.edges) {
      if (e.to == id && e.from != id)
        in.push_back(e);
      else if (e.from == id && e.to != id)
        outgoing.push_back(e);
      else if (e.from != id)
        kept.push_back(e);
    }
    for (const auto& a : in)
      for (const auto& b : outgoing)
        kept.push_back(ActivityEdge{a.from, b.to, a.guard ? a.guard : b.guard, a.variant ? a.variant : b.variant});
    out.edges = std::move(kept);
    std::erase_if(out.nodes, [&](const ActivityNode& n) { return n.id == id; });
  }
  return out;
}

Diagnostics wf(std::string_view code, std::string message, std::vector<std::string> subject) {
  return {make_error(code, std::move(message), std::move(subject))};
}

}  // namespace

Expected<ActivityGraph> resolve_workflow(const ActivityGraph& graph, const derivation::CustomizationModel& cm,
                                         const derivation::DerivationTrace& trace) {
  std::set<std::string> dropped;
  std::set<std::string> removed;
  for (const auto& effect : trace) {
    if (const auto* d = std::get_if<derivation::VpDropped>(&effect)) dropped.insert(d->vp);
    if (const auto* r = std::get_if<derivation::VariantRemoved>(&effect)) removed.insert(r->variant);
  }

  std::map<std::string, Replacement> replaced;
  for (const auto& n : graph.nodes) {
    if (n.kind != NodeKind::vp_region) continue;
    if (n.id == graph.entry || n.id == graph.exit)
      return wf(codes::unreachable_node, "vp_region '" + n.id + "' cannot be the entry or exit", {n.id});

    if (const auto* chosen = cm.binding.find(n.vp)) {
      if (dropped.count(n.vp) == 0)
        return wf(codes::trace_mismatch, "the trace does not record binding '" + n.vp + "'", {n.id, n.vp});
      std::vector<const ActivityGraph*> fragments;
      for (const auto& v : *chosen)
        if (const Region* r = n.region(v)) fragments.push_back(&r->fragment);
      replaced.emplace(n.id, chain(fragments));
      continue;
    }

    if (const VariationPoint* cp = cm.model.find_vp(n.vp)) {
      for (const auto& r : n.regions)
        if (!cp->attaches(r.variant) && removed.count(r.variant) == 0)
          return wf(codes::trace_mismatch,
                    "'" + r.variant + "' is missing from '" + n.vp + "' but the trace does not remove it",
                    {n.id, r.variant});
      std::vector<Branch> branches;
      for (const auto& v : cp->variant_ids())
        if (const Region* r = n.region(v)) branches.push_back(Branch{v, cp->find_edge(v)->guard, &r->fragment});
      if (branches.empty() && !n.regions.empty())
        return wf(codes::dangling_region, "every region of '" + n.id + "' belongs to a removed variant", {n.id, n.vp});
      if (branches.size() <= 1) {
        std::vector<const ActivityGraph*> fragments;
        for (const auto& b : branches) fragments.push_back(b.fragment);
        replaced.emplace(n.id, chain(fragments));
      } else {
        replaced.emplace(n.id, choice(n.id, n.vp, branches));
      }
      continue;
    }

    if (dropped.count(n.vp) != 0) {
      replaced.emplace(n.id, Replacement{});
      continue;
    }
    return wf(codes::trace_mismatch, "'" + n.vp + "' is neither bound, kept nor dropped by the derivation", {n.id, n.vp});
  }

  ActivityGraph out = splice(graph, replaced);
  if (auto diagnostics = validate_structure(out); !diagnostics.empty()) return diagnostics;
  return out;
}

Expected<ActivityGraph> apply_configuration(const ActivityGraph& resolved, const configurator::TenantConfiguration& cfg,
                                            const derivation::CustomizationModel& cm) {
  Diagnostics problems;
  if (cfg.model_name != cm.model.name)
    problems.push_back(make_error(codes::config_model_mismatch,
                                  "configuration is for '" + cfg.model_name + "', not '" + cm.model.name + "'", {}));
  for (const auto& d : configurator::validate_configuration(cm, cfg))
    problems.push_back(make_error(codes::config_model_mismatch, d.code + ": " + d.message, d.subject));
  if (!problems.empty()) return problems;

  const std::string decision_suffix = "_decision";
  ActivityGraph g = resolved;
  std::set<std::string> pruned;
  std::map<std::string, Replacement> collapsed;

  for (const auto& n : resolved.nodes) {
    if (n.kind != NodeKind::decision || n.vp.empty() || !n.id.ends_with(decision_suffix)) continue;
    const std::string merge = n.id.substr(0, n.id.size() - decision_suffix.size()) + "_merge";
    const auto* selected = cfg.find(n.vp);
    auto chosen = [&](const std::string& v) {
      return selected && std::find(selected->begin(), selected->end(), v) != selected->end();
    };

    std::size_t kept = 0;
    for (const auto& e : resolved.edges) {
      if (e.from != n.id || !e.variant) continue;
      if (chosen(*e.variant)) {
        ++kept;
        continue;
      }
      // Everything reachable from the branch entry before the merge.
      std::deque<std::string> queue{e.to};
      std::set<std::string> branch{e.to};
      while (!queue.empty()) {
        auto id = queue.front();
        queue.pop_front();
        for (const auto& f : resolved.edges)
          if (f.from == id && f.to != merge && branch.insert(f.to).second) queue.push_back(f.to);
      }
      pruned.insert(branch.begin(), branch.end());
    }
    if (kept >= 2) continue;

    // A choiceless pair: strip the branch labels and splice the pair away.
    for (auto& e : g.edges) {
      if ((e.from == n.id || e.to == merge) && e.variant) {
        e.guard.reset();
        e.variant.reset();
      }
    }
    if (kept == 0) g.edges.push_back(ActivityEdge{n.id, merge, std::nullopt, std::nullopt});
    collapsed.emplace(n.id, Replacement{});
    collapsed.emplace(merge, Replacement{});
  }

  std::erase_if(g.nodes, [&](const ActivityNode& n) { return pruned.count(n.id) != 0; });
  std::erase_if(g.edges, [&](const ActivityEdge& e) { return pruned.count(e.from) != 0 || pruned.count(e.to) != 0; });

  ActivityGraph out = splice(g, collapsed);
  if (auto diagnostics = validate_structure(out); !diagnostics.empty()) return diagnostics;
  return out;
}

}  // namespace ovm::workflow

namespace ovm::workflow {

namespace {

std::string label(const ActivityNode& n) {
  const bool anonymous = n.kind == NodeKind::decision || n.kind == NodeKind::merge;
  return std::string(to_string(n.kind)) + ":" + (anonymous ? n.vp : n.id);
}

using EdgeKey = std::tuple<std::string, std::string, std::optional<std::string>, std::optional<std::string>>;

}  // namespace

bool isomorphic(const ActivityGraph& a, const ActivityGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  std::map<std::string, std::vector<std::string>> classes_a;
  std::map<std::string, std::vector<std::string>> classes_b;
  for (const auto& n : a.nodes) classes_a[label(n)].push_back(n.id);
  for (const auto& n : b.nodes) classes_b[label(n)].push_back(n.id);
  if (classes_a.size() != classes_b.size()) return false;
  for (const auto& [key, ids] : classes_a) {
    auto it = classes_b.find(key);
    if (it == classes_b.end() || it->second.size() != ids.size()) return false;
    std::sort(it->second.begin(), it->second.end());
  }

  std::vector<EdgeKey> target;
  for (const auto& e : b.edges) target.emplace_back(e.from, e.to, e.guard, e.variant);
  std::sort(target.begin(), target.end());

  std::vector<std::pair<const std::vector<std::string>*, std::vector<std::string>>> slots;
  for (const auto& [key, ids] : classes_a) slots.emplace_back(&ids, classes_b[key]);

  std::unordered_map<std::string, std::string> mapping;
  std::function<bool(std::size_t)> search = [&](std::size_t k) -> bool {
    if (k == slots.size()) {
      std::vector<EdgeKey> mapped;
      for (const auto& e : a.edges) mapped.emplace_back(mapping[e.from], mapping[e.to], e.guard, e.variant);
      std::sort(mapped.begin(), mapped.end());
      return mapped == target;
    }
    auto& [from, to] = slots[k];
    std::sort(to.begin(), to.end());
    do {
      for (std::size_t i = 0; i < from->size(); ++i) mapping[(*from)[i]] = to[i];
      if (search(k + 1)) return true;
    } while (std::next_permutation(to.begin(), to.end()));
    return false;
  };
  return a.entry.empty() == b.entry.empty() && search(0);
}

}  // namespace ovm::workflow
