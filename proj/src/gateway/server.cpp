#include <atomic>
#include <csignal>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "ovm/gateway/service.hpp"

namespace ovm::gateway {

int serve(const ServeOptions& options, std::ostream& log) {
  // Block the shutdown signals in every thread; one waiter thread takes them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(ServiceOptions{options.session_ttl, options.state_dir});
  if (const auto restored = service.load_snapshot(); restored > 0)
    log << "restored " << restored << " model(s) from " << options.state_dir << '\n';

  httplib::Server server;
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response out = service.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const char* pattern = R"(/(models|sessions)(/.*)?)";
  server.Get(pattern, route);
  server.Post(pattern, route);
  server.Delete(pattern, route);

  if (!options.ui_dir.empty() && std::filesystem::is_directory(options.ui_dir)) {
    server.set_mount_point("/ui", options.ui_dir);
  } else {
    server.Get("/ui", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<!doctype html><title>ovm</title><p>No tenant UI bundle is installed.</p>", "text/html");
    });
  }

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    signalled = true;
    server.stop();
  });

  if (!server.bind_to_port(options.host, options.port)) {
    log << "cannot listen on " << options.host << ':' << options.port << '\n';
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 1;
  }
  log << "listening on http://" << options.host << ':' << options.port << '\n';
  server.listen_after_bind();
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.save_snapshot();
  if (!options.state_dir.empty()) log << "snapshot written to " << options.state_dir << '\n';
  return 0;
}

}  // namespace ovm::gateway
