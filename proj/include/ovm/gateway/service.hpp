#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "ovm/configurator.hpp"
#include "ovm/derivation.hpp"
#include "ovm/model.hpp"

namespace ovm::gateway {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  std::chrono::seconds session_ttl{3600};
  std::string state_dir;  // empty: no snapshots
};

/// The HTTP API without the transport. Thread-safe: the model store takes
/// many readers or one writer, and each session serializes its own
/// operations behind a per-session lock.
class Service {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit Service(ServiceOptions options = {});

  Response handle(std::string_view method, std::string_view path, const std::string& body);

  /// Writes stored models to the state directory (no-op without one).
  void save_snapshot() const;
  /// Restores models written by save_snapshot. Returns how many were loaded.
  std::size_t load_snapshot();

  std::size_t session_count() const;
  void set_clock(Clock clock) { clock_ = std::move(clock); }

 private:
  struct StoredModel {
    std::string id;
    VariabilityModel model;
    std::string canonical;
    std::shared_ptr<const derivation::CustomizationModel> customization;  // null while internal VPs remain
    std::optional<std::string> derived_from;
    derivation::DerivationTrace trace;
  };
  struct SessionSlot {
    std::mutex lock;
    configurator::ConfiguratorSession session;
    std::atomic<std::chrono::steady_clock::rep> last_used{0};
  };

  Response post_model(const std::string& body);
  Response get_model(const std::string& id);
  Response derive_model(const std::string& id, const std::string& body);
  Response analyze_model(const std::string& id);
  Response resolve_workflow(const std::string& id, const std::string& body);
  Response post_session(const std::string& body);
  Response get_session(const std::string& id);
  Response decide(const std::string& id, const std::string& body);
  Response retract(const std::string& id, const std::string& body);
  Response validate(const std::string& id);

  std::shared_ptr<const StoredModel> find_model(const std::string& id) const;
  std::string store(VariabilityModel model, std::optional<std::string> derived_from, derivation::DerivationTrace trace,
                    std::shared_ptr<const derivation::CustomizationModel> customization);
  std::shared_ptr<SessionSlot> find_session(const std::string& id);
  void sweep_sessions();
  std::string new_session_id();
  std::chrono::steady_clock::rep now() const { return clock_().time_since_epoch().count(); }

  ServiceOptions options_;
  Clock clock_;

  mutable std::shared_mutex models_lock_;
  std::map<std::string, std::shared_ptr<const StoredModel>> models_;
  std::map<std::string, derivation::DeveloperBinding> bindings_;  // derived model id -> binding used
  std::size_t next_model_ = 1;

  mutable std::mutex sessions_lock_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 7710;
  std::string state_dir;
  std::chrono::seconds session_ttl{3600};
  std::string ui_dir;
};

/// Runs the HTTP service until SIGINT/SIGTERM, then snapshots. Returns an
/// exit code.
int serve(const ServeOptions& options, std::ostream& log);

}  // namespace ovm::gateway
