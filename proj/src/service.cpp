#include "procomplete/service.hpp"

#include <httplib.h>

#include <chrono>
#include <json.hpp>

#include "procomplete/error.hpp"

namespace procomplete {

using nlohmann::json;

namespace {

json error_body(std::string_view code, std::string_view message,
                const std::string& request_id) {
  return {{"error", {{"code", code}, {"message", message}}},
          {"request_id", request_id}};
}

json meta_json(const IndexMeta& m, std::size_t records) {
  return {{"format_version", m.format_version},
          {"slice_length", m.slice_length},
          {"embedder", {{"id", m.embedder.id}, {"dimension", m.embedder.dimension}}},
          {"mode", to_string(m.mode)},
          {"created_at", m.created_at},
          {"records", records}};
}

json recommendation_json(const Recommendation& r) {
  return {{"label", r.label ? json(*r.label) : json(nullptr)},
          {"type", r.type.display_name()},
          {"type_tag", r.type.tag()},
          {"score", r.score},
          {"explanation",
           {{"matched_slice_text", r.explanation.matched_slice_text},
            {"source_process_id", r.explanation.source_process_id},
            {"similarity", r.explanation.similarity},
            {"query_slice_text", r.explanation.query_slice_text}}}};
}

}  // namespace

std::string render_recommendations(std::span<const Recommendation> recs,
                                   const std::string& request_id,
                                   double latency_ms) {
  json list = json::array();
  for (const auto& r : recs) list.push_back(recommendation_json(r));
  return json{{"request_id", request_id},
              {"recommendations", std::move(list)},
              {"latency_ms", latency_ms}}
      .dump();
}

struct RecommendationService::Http {
  httplib::Server server;
};

RecommendationService::RecommendationService(
    std::vector<SliceIndex> indexes,
    std::shared_ptr<const EmbeddingProvider> provider, ServiceConfig config)
    : indexes_(std::move(indexes)),
      provider_(std::move(provider)),
      config_(std::move(config)),
      http_(std::make_unique<Http>()) {
  if (indexes_.empty())
    throw Error(ErrorCode::InvalidArgument, "service needs at least one index");
  if (!provider_) throw Error(ErrorCode::InvalidArgument, "service needs a provider");
  for (std::size_t i = 0; i < indexes_.size(); ++i) {
    const auto& meta = indexes_[i].meta();
    if (!(meta.embedder == provider_->descriptor()))
      throw Error(ErrorCode::DescriptorMismatch,
                  "index embedded with '" + meta.embedder.id + "' (dim " +
                      std::to_string(meta.embedder.dimension) +
                      ") but provider is '" + provider_->descriptor().id +
                      "' (dim " +
                      std::to_string(provider_->descriptor().dimension) + ")");
    for (std::size_t j = 0; j < i; ++j)
      if (indexes_[j].meta().mode == meta.mode)
        throw Error(ErrorCode::InvalidArgument,
                    "two indexes for mode " + std::string(to_string(meta.mode)));
  }

  auto& srv = http_->server;
  const std::size_t threads = std::max<std::size_t>(config_.worker_threads, 1);
  srv.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  srv.set_keep_alive_max_count(1000000);
  srv.Post("/v1/recommendations",
           [this](const httplib::Request& req, httplib::Response& res) {
             auto r = handle_recommend(req.body);
             res.status = r.status;
             res.set_content(r.body, "application/json");
           });
  srv.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    auto r = handle_health();
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  srv.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        res.status = 500;
        res.set_content(error_body("internal_error", "unexpected failure", "").dump(),
                        "application/json");
      });
}

RecommendationService::~RecommendationService() { stop(); }

const SliceIndex* RecommendationService::index_for(GraphMode mode) const {
  for (const auto& idx : indexes_)
    if (idx.meta().mode == mode) return &idx;
  return nullptr;
}

void RecommendationService::log_request(const std::string& request_id,
                                        const std::string& user_id,
                                        double latency_ms, int status) const {
  if (config_.request_log == nullptr) return;
  const std::string line = json{{"request_id", request_id},
                                {"user_id", user_id},
                                {"latency_ms", latency_ms},
                                {"status", status}}
                               .dump();
  std::lock_guard lock(log_mutex_);
  *config_.request_log << line << '\n';
}

RecommendationService::Response RecommendationService::handle_recommend(
    std::string_view request_body) const {
  const auto started = std::chrono::steady_clock::now();
  const std::string request_id = "req-" + std::to_string(next_request_++);
  std::string user_id;

  auto finish = [&](int status, json body) {
    const double latency_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    if (status == 200) body["latency_ms"] = latency_ms;
    log_request(request_id, user_id, latency_ms, status);
    return Response{status, body.dump()};
  };
  auto fail = [&](int status, std::string_view code, std::string_view message) {
    return finish(status, error_body(code, message, request_id));
  };

  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::exception&) {
    return fail(400, "invalid_request", "body is not valid JSON");
  }
  if (!req.is_object()) return fail(400, "invalid_request", "body must be an object");

  auto string_field = [&](const char* name) -> std::optional<std::string> {
    auto it = req.find(name);
    if (it == req.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  const auto xml = string_field("bpmn_xml");
  const auto task_id = string_field("task_id");
  const auto user = string_field("user_id");
  if (user) user_id = *user;
  if (!xml || xml->empty())
    return fail(400, "invalid_request", "bpmn_xml must be a nonempty string");
  if (!task_id || task_id->empty())
    return fail(400, "invalid_request", "task_id must be a nonempty string");
  if (!user) return fail(400, "invalid_request", "user_id must be a string");

  std::size_t k = config_.k_default;
  if (auto it = req.find("k"); it != req.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long long>() < 1)
      return fail(400, "invalid_request", "k must be a positive integer");
    k = it->get<std::size_t>();
  }
  bool filtered = false;
  if (auto it = req.find("filtered"); it != req.end() && !it->is_null()) {
    if (!it->is_boolean())
      return fail(400, "invalid_request", "filtered must be a boolean");
    filtered = it->get<bool>();
  }
  GraphMode mode = indexes_.front().meta().mode;
  if (auto mode_text = string_field("mode")) {
    try {
      mode = parse_graph_mode(*mode_text);
    } catch (const Error& e) {
      return fail(400, "invalid_request", e.what());
    }
  }
  const SliceIndex* index = index_for(mode);
  if (index == nullptr)
    return fail(409, "mode_unavailable",
                "no index loaded for mode " + std::string(to_string(mode)));

  try {
    const auto graphs = parse_bpmn(*xml);
    const ProcessGraph* graph = nullptr;
    for (const auto& g : graphs)
      if (g.contains(*task_id)) {
        graph = &g;
        break;
      }
    if (graph == nullptr)
      return fail(404, "task_not_found", "no element with id '" + *task_id + "'");

    RecommendationQuery q;
    q.graph = graph;
    q.target_node = *task_id;
    q.k = k;
    q.filtered = filtered;
    q.mode = mode;
    const auto recs = recommend(q, *index, *provider_);

    json list = json::array();
    for (const auto& r : recs) list.push_back(recommendation_json(r));
    return finish(200, {{"request_id", request_id}, {"recommendations", std::move(list)}});
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::MalformedXml:
      case ErrorCode::NoProcessFound:
      case ErrorCode::DanglingFlow:
      case ErrorCode::InvalidArgument:
        return fail(400, "malformed_bpmn", e.what());
      case ErrorCode::UnknownNode:
        // A gateway target disappears when the graph is contracted.
        return fail(404, "task_not_found", e.what());
      case ErrorCode::NoSliceEndsAtTarget:
        return fail(422, "no_slices", e.what());
      default:
        return fail(500, "internal_error", to_string(e.code()));
    }
  } catch (const std::exception&) {
    return fail(500, "internal_error", "unexpected failure");
  }
}

RecommendationService::Response RecommendationService::handle_health() const {
  json metas = json::array();
  for (const auto& idx : indexes_) metas.push_back(meta_json(idx.meta(), idx.size()));
  return {200, json{{"status", "ok"}, {"indexes", std::move(metas)}}.dump()};
}

int RecommendationService::bind() {
  auto& srv = http_->server;
  if (config_.port == 0)
    bound_port_ = srv.bind_to_any_port(config_.bind_host);
  else
    bound_port_ = srv.bind_to_port(config_.bind_host, config_.port)
                      ? config_.port
                      : -1;
  if (bound_port_ <= 0)
    throw Error(ErrorCode::IoFailure, "cannot bind " + config_.bind_host + ":" +
                                          std::to_string(config_.port));
  return bound_port_;
}

int RecommendationService::start() {
  const int port = bind();
  thread_ = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return port;
}

void RecommendationService::run() {
  bind();
  http_->server.listen_after_bind();
}

void RecommendationService::stop() {
  if (http_) http_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace procomplete
