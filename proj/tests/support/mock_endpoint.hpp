#pragma once

// Minimal OpenAI-compatible endpoint for readiness and sweep tests. Serves
// /v1/models once `not_ready_for` probes have been answered with 503.

#include <httplib.h>

#include <atomic>
#include <string>
#include <thread>

namespace testsupport {

class MockEndpoint {
 public:
  explicit MockEndpoint(int not_ready_for = 0) : not_ready_for_(not_ready_for) {
    server_.Get("/v1/models", [this](const httplib::Request&, httplib::Response& res) {
      if (probes_++ < not_ready_for_) {
        res.status = 503;
        return;
      }
      res.set_content(R"({"object":"list","data":[{"id":"meta-llama/Llama-4-Scout-17B-16E-Instruct"}]})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }
  MockEndpoint(const MockEndpoint&) = delete;
  MockEndpoint& operator=(const MockEndpoint&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int probes() const { return probes_; }

 private:
  httplib::Server server_;
  int not_ready_for_;
  std::atomic<int> probes_{0};
  int port_ = 0;
  std::thread thread_;
};

}  // namespace testsupport
