#pragma once

#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>

namespace coba::testing {

/// An httplib server on a free loopback port, running until destroyed.
class FakeServer {
 public:
  httplib::Server server;

  void start() {
    port_ = server.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~FakeServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  int port_ = 0;
  std::thread thread_;
};

}  // namespace coba::testing
