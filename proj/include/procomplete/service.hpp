#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "procomplete/embedder.hpp"
#include "procomplete/recommender.hpp"

namespace procomplete {

struct ServiceConfig {
  std::string bind_host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t k_default = 3;
  std::size_t worker_threads = 128;
  std::ostream* request_log = nullptr;  // JSONL, one line per request
};

/// HTTP front end over one slice index per graph mode.
///
///   POST /v1/recommendations
///     {"bpmn_xml", "task_id", "user_id", "k"?, "filtered"?, "mode"?}
///   GET  /v1/health
///
/// Errors carry {"error": {"code", "message"}} with stable codes:
/// invalid_request (400), malformed_bpmn (400), task_not_found (404),
/// mode_unavailable (409), no_slices (422), internal_error (500).
/// Success body of POST /v1/recommendations.
std::string render_recommendations(std::span<const Recommendation> recs,
                                   const std::string& request_id,
                                   double latency_ms);

class RecommendationService {
 public:
  /// Throws Error(DescriptorMismatch) if an index was embedded with another
  /// provider, Error(InvalidArgument) for two indexes of the same mode or
  /// none at all.
  RecommendationService(std::vector<SliceIndex> indexes,
                        std::shared_ptr<const EmbeddingProvider> provider,
                        ServiceConfig config = {});
  ~RecommendationService();

  RecommendationService(const RecommendationService&) = delete;
  RecommendationService& operator=(const RecommendationService&) = delete;

  struct Response {
    int status = 200;
    std::string body;  // JSON
  };

  Response handle_recommend(std::string_view request_body) const;
  Response handle_health() const;

  /// Binds and serves on a background thread; returns the bound port.
  /// Throws Error(IoFailure) if the address cannot be bound.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const noexcept { return bound_port_; }

 private:
  const SliceIndex* index_for(GraphMode mode) const;
  void log_request(const std::string& request_id, const std::string& user_id,
                   double latency_ms, int status) const;
  int bind();

  struct Http;
  std::vector<SliceIndex> indexes_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  ServiceConfig config_;
  std::unique_ptr<Http> http_;
  std::thread thread_;
  int bound_port_ = 0;
  mutable std::atomic<std::uint64_t> next_request_{1};
  mutable std::mutex log_mutex_;
};

}  // namespace procomplete
