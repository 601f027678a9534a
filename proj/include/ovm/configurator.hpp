#pragma once

#include <compare>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovm/derivation.hpp"
#include "ovm/result.hpp"

namespace ovm::configurator {

using derivation::CustomizationModel;

/// A tenant's selected variants per customization point.
struct TenantConfiguration {
  std::string model_name;
  std::vector<std::pair<std::string, std::vector<std::string>>> selections;

  const std::vector<std::string>* find(std::string_view cp) const;
  bool operator==(const TenantConfiguration&) const = default;
};

/// Empty iff every mandatory variant is selected, every group count lies in
/// its cardinality, every carried constraint holds and nothing unknown is
/// selected. A customization point referenced by a constraint is always part
/// of the product.
Diagnostics validate_configuration(const CustomizationModel& cm, const TenantConfiguration& cfg);

enum class Decision { undecided, selected, deselected };
enum class Mode { exact, heuristic };

std::string_view to_string(Decision d);
std::string_view to_string(Mode m);

/// Exact propagation is used while at most this many optional pairs are free.
inline constexpr int exact_pair_cap = 16;

struct Pair {
  std::string cp;
  std::string variant;

  auto operator<=>(const Pair&) const = default;
  bool operator==(const Pair&) const = default;
};

struct PairState {
  Pair pair;
  Decision value = Decision::undecided;
  bool forced = false;     // fixed by propagation (or mandatory)
  bool mandatory = false;  // locked for the whole session
  bool tenant = false;     // decided by the tenant

  bool operator==(const PairState&) const = default;
};

/// Interactive configuration state. Sessions are values: every operation
/// returns a new session and leaves its input usable.
class ConfiguratorSession {
 public:
  const CustomizationModel& model() const { return *model_; }
  const std::shared_ptr<const CustomizationModel>& model_ptr() const { return model_; }
  Mode mode() const { return mode_; }
  bool conflict() const { return conflict_; }
  const std::vector<PairState>& pairs() const { return pairs_; }
  const PairState* find(std::string_view cp, std::string_view variant) const;
  Decision value(std::string_view cp, std::string_view variant) const;
  std::vector<Pair> forced() const;
  const std::vector<std::pair<Pair, Decision>>& tenant_decisions() const { return decisions_; }

  bool operator==(const ConfiguratorSession& other) const;

 private:
  friend class SessionEngine;

  std::shared_ptr<const CustomizationModel> model_;
  std::vector<PairState> pairs_;
  std::vector<std::pair<Pair, Decision>> decisions_;
  Mode mode_ = Mode::exact;
  bool conflict_ = false;
};

struct DecisionReport {
  std::vector<Pair> newly_forced;
  bool conflict = false;
  Mode mode = Mode::exact;
};

struct DecisionResult {
  ConfiguratorSession session;
  DecisionReport report;
};

/// SES001 when the model admits no configuration (checked in exact mode).
Expected<ConfiguratorSession> new_session(std::shared_ptr<const CustomizationModel> cm);

/// Records a tenant decision and propagates. A conflict is reported as data,
/// not as an error. SES002 for mandatory pairs, SES003 for unknown pairs.
Expected<DecisionResult> decide(const ConfiguratorSession& session, std::string_view cp, std::string_view variant,
                                Decision value);

/// Returns a tenant-made decision to undecided and recomputes every forced
/// decision from the remaining tenant decisions. SES004 for pairs fixed by
/// propagation, SES002 for mandatory pairs.
Expected<ConfiguratorSession> retract(const ConfiguratorSession& session, std::string_view cp, std::string_view variant);

/// Treats undecided pairs as deselected; returns the configuration when it
/// validates, otherwise the blocking diagnostics.
Expected<TenantConfiguration> complete(const ConfiguratorSession& session);

}  // namespace ovm::configurator
