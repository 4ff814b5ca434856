#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "procomplete/corpus.hpp"
#include "procomplete/error.hpp"
#include "procomplete/evaluation.hpp"
#include "procomplete/load_test.hpp"
#include "procomplete/recommender.hpp"
#include "procomplete/report.hpp"
#include "procomplete/service.hpp"

using namespace procomplete;

namespace {

constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : std::move(fallback);
}

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path + "'");
  out << bytes;
  if (!out) throw Error(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

// Provider for an existing index: the spec names the function, the dimension
// follows the index unless the spec carries its own.
std::shared_ptr<const EmbeddingProvider> provider_for(const std::string& spec,
                                                      std::size_t dimension) {
  return make_provider(spec, dimension);
}

std::string dataset_name(const std::string& dir) {
  auto p = std::filesystem::path(dir).lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

struct CommonEval {
  std::string corpus;
  std::size_t n = 3;
  std::size_t k = 3;
  bool filtered = false;
  std::string mode = "with-gateways";
  std::string provider = "hash-v1";
  std::size_t dimension = 512;
  std::uint64_t seed = 7;
  std::size_t runs = 30;
  std::string format = "csv";
  std::string out = "-";
  std::string dataset;
  bool fallback = false;

  EvalConfig config() const {
    EvalConfig c;
    c.slice_length = n;
    c.k = k;
    c.filtered = filtered;
    c.mode = parse_graph_mode(mode);
    c.runs_for_random = runs;
    c.seed = seed;
    c.fallback = fallback;
    c.validate();
    return c;
  }
};

void add_eval_flags(CLI::App* cmd, CommonEval& o, bool with_n) {
  cmd->add_option("--corpus", o.corpus, "Directory of BPMN files")->required();
  if (with_n) cmd->add_option("--n", o.n, "Slice length")->check(CLI::Range(1, 64));
  cmd->add_option("--k", o.k, "Number of recommendations per query")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--filtered", o.filtered, "Exclude gateways and end events");
  cmd->add_option("--mode", o.mode, "with-gateways or tasks-only")
      ->check(CLI::IsMember({"with-gateways", "tasks-only"}));
  cmd->add_option("--provider", o.provider, "hash-v1, hash-v1:<dim> or remote:<url>");
  cmd->add_option("--dim", o.dimension, "Embedding dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed for the random baseline");
  cmd->add_option("--runs", o.runs, "Random baseline repetitions")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", o.format, "csv or markdown")
      ->check(CLI::IsMember({"csv", "markdown", "md"}));
  cmd->add_option("--out", o.out, "Report file, - for stdout");
  cmd->add_option("--dataset", o.dataset, "Dataset name (default: corpus directory name)");
  cmd->add_flag("--fallback", o.fallback, "Use shorter slices when none of length n exist");
}

std::string human_table(const std::vector<Recommendation>& recs) {
  std::ostringstream out;
  out << "rank  score   type                label\n";
  char line[64];
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    std::snprintf(line, sizeof line, "%-5zu %-7.4f ", i + 1, r.score);
    std::string type = r.type.display_name();
    type.resize(std::max<std::size_t>(type.size(), 19), ' ');
    out << line << type << ' ' << r.label.value_or("(unlabeled)") << '\n';
    out << "      matched \"" << r.explanation.matched_slice_text << "\" in "
        << r.explanation.source_process_id << '\n';
  }
  if (recs.empty()) out << "(no recommendation)\n";
  return out.str();
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) return {bind, 8080};
  try {
    return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad bind address '" + bind + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-element recommendations for process models from slice embeddings"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  // build-index
  std::string bi_corpus, bi_out, bi_mode = "with-gateways", bi_provider = "hash-v1";
  std::size_t bi_n = 3, bi_dim = 512;
  auto* build = app.add_subcommand("build-index", "Build a slice index from a corpus");
  build->add_option("--corpus", bi_corpus, "Directory of BPMN files")->required();
  build->add_option("--n", bi_n, "Slice length")->check(CLI::Range(1, 64));
  build->add_option("--mode", bi_mode, "with-gateways or tasks-only")
      ->check(CLI::IsMember({"with-gateways", "tasks-only"}));
  build->add_option("--provider", bi_provider, "hash-v1, hash-v1:<dim> or remote:<url>");
  build->add_option("--dim", bi_dim, "Embedding dimension")->check(CLI::PositiveNumber);
  build->add_option("--out", bi_out, "Index file to write")->required();

  // recommend
  std::string rc_index, rc_bpmn, rc_task, rc_provider;
  std::size_t rc_k = 3;
  bool rc_filtered = false, rc_json = false, rc_fallback = false;
  auto* rec = app.add_subcommand("recommend", "Recommend next elements for one node");
  rec->add_option("--index", rc_index, "Index file")->required();
  rec->add_option("--bpmn", rc_bpmn, "BPMN file with the model under construction")
      ->required();
  rec->add_option("--task", rc_task, "Id of the node to extend")->required();
  rec->add_option("--k", rc_k, "Number of recommendations")->check(CLI::PositiveNumber);
  rec->add_flag("--filtered", rc_filtered, "Exclude gateways and end events");
  rec->add_option("--provider", rc_provider,
                  "Embedding provider (default: the one recorded in the index)");
  rec->add_flag("--fallback", rc_fallback, "Use shorter slices when none of length n exist");
  rec->add_flag("--json", rc_json, "Print the service response body");

  // evaluate
  CommonEval ev;
  std::string ev_ratio_out;
  auto* eval = app.add_subcommand("evaluate", "Leave-one-out evaluation against the random baseline");
  add_eval_flags(eval, ev, true);
  eval->add_option("--ratio-out", ev_ratio_out, "Optional slicing/random ratio CSV");

  // study
  CommonEval st;
  std::string st_lengths = "1,2,3,4,5";
  auto* study = app.add_subcommand("study", "Metrics for a range of slice lengths");
  add_eval_flags(study, st, false);
  study->add_option("--lengths", st_lengths, "Comma-separated slice lengths");

  // serve
  std::vector<std::string> sv_index;
  std::string sv_bind = env_or("BIND_ADDR", "127.0.0.1:8080");
  std::string sv_provider_url = env_or("PROVIDER_URL", "");
  std::string sv_log;
  std::size_t sv_k = 3, sv_threads = 128;
  try {
    sv_k = std::stoul(env_or("K_DEFAULT", "3"));
  } catch (const std::exception&) {
    std::cerr << "error: K_DEFAULT must be a positive integer\n";
    return kUsageError;
  }
  if (const auto env_index = env_or("INDEX_PATH", ""); !env_index.empty())
    sv_index = split_list(env_index);
  auto* serve = app.add_subcommand("serve", "Serve recommendations over HTTP");
  serve->add_option("--index", sv_index,
                    "Index file(s), at most one per mode (env INDEX_PATH, comma-separated)");
  serve->add_option("--bind", sv_bind, "host:port to listen on (env BIND_ADDR)");
  serve->add_option("--provider-url", sv_provider_url,
                    "Remote encoder URL (env PROVIDER_URL; default: hash-v1)");
  serve->add_option("--k-default", sv_k, "Default k (env K_DEFAULT)")
      ->check(CLI::PositiveNumber);
  serve->add_option("--threads", sv_threads, "Worker threads")->check(CLI::PositiveNumber);
  serve->add_option("--log", sv_log, "JSONL request log file (- for stderr)");

  // loadtest
  std::string lt_url = "http://127.0.0.1:8080";
  std::size_t lt_users = 10, lt_requests = 10000;
  std::uint64_t lt_seed = 1;
  bool lt_no_think = false;
  long long lt_think_min = 1000, lt_think_max = 5000;
  auto* load = app.add_subcommand("loadtest", "Drive a running service with simulated users");
  load->add_option("--url", lt_url, "Service base URL");
  load->add_option("--users", lt_users, "Concurrent users")->check(CLI::PositiveNumber);
  load->add_option("--requests", lt_requests, "Total requests")->check(CLI::PositiveNumber);
  load->add_option("--seed", lt_seed, "Seed for workloads and user streams");
  load->add_flag("--no-think", lt_no_think, "Send requests back to back");
  load->add_option("--think-min-ms", lt_think_min, "Minimum think time")
      ->check(CLI::NonNegativeNumber);
  load->add_option("--think-max-ms", lt_think_max, "Maximum think time")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*build) {
      const auto corpus = load_corpus(bi_corpus);
      const auto provider = make_provider(bi_provider, bi_dim);
      const auto index = build_index(corpus, bi_n, *provider, parse_graph_mode(bi_mode));
      save_index(index, bi_out);
      std::cerr << "indexed " << index.size() << " slices from " << corpus.size()
                << " processes into " << bi_out << '\n';
      return 0;
    }

    if (*rec) {
      const auto index = load_index(rc_index);
      const auto provider = provider_for(
          rc_provider.empty() ? index.meta().embedder.id : rc_provider,
          index.meta().embedder.dimension);
      const auto graphs = parse_bpmn(read_file(rc_bpmn));
      const ProcessGraph* graph = nullptr;
      for (const auto& g : graphs)
        if (g.contains(rc_task)) graph = &g;
      if (graph == nullptr)
        throw Error(ErrorCode::UnknownNode, "no element with id '" + rc_task + "'");
      RecommendationQuery q;
      q.graph = graph;
      q.target_node = rc_task;
      q.k = rc_k;
      q.filtered = rc_filtered;
      q.mode = index.meta().mode;
      q.fallback = rc_fallback;
      const auto started = std::chrono::steady_clock::now();
      const auto recs = recommend(q, index, *provider);
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();
      if (rc_json)
        std::cout << render_recommendations(recs, "cli", ms) << '\n';
      else
        std::cout << human_table(recs);
      return 0;
    }

    if (*eval) {
      const auto config = ev.config();
      const auto format = parse_report_format(ev.format);
      const auto corpus = load_corpus(ev.corpus);
      const auto provider = make_provider(ev.provider, ev.dimension);
      const auto name = ev.dataset.empty() ? dataset_name(ev.corpus) : ev.dataset;
      const auto report = evaluate_dataset(corpus, config, *provider, name);
      write_output(ev.out, emit_report(report, format));
      if (!ev_ratio_out.empty()) write_output(ev_ratio_out, emit_ratio_csv(report));
      return 0;
    }

    if (*study) {
      const auto config = st.config();
      const auto format = parse_report_format(st.format);
      std::vector<std::size_t> lengths;
      for (const auto& item : split_list(st_lengths)) {
        std::size_t n = 0;
        try {
          n = std::stoul(item);
        } catch (const std::exception&) {
          throw UsageError("bad slice length '" + item + "'");
        }
        if (n == 0) throw UsageError("slice lengths must be >= 1");
        lengths.push_back(n);
      }
      if (lengths.empty()) throw UsageError("--lengths is empty");
      const auto corpus = load_corpus(st.corpus);
      const auto provider = make_provider(st.provider, st.dimension);
      const auto name = st.dataset.empty() ? dataset_name(st.corpus) : st.dataset;
      const auto rows = slice_length_study(corpus, lengths, config, *provider, name);
      write_output(st.out, emit_study(rows, format));
      return 0;
    }

    if (*serve) {
      if (sv_index.empty()) throw UsageError("serve needs --index or INDEX_PATH");
      if (sv_k == 0) throw UsageError("K_DEFAULT must be >= 1");
      std::vector<SliceIndex> indexes;
      for (const auto& path : sv_index) indexes.push_back(load_index(path));
      const auto& meta = indexes.front().meta();
      std::shared_ptr<const EmbeddingProvider> provider =
          sv_provider_url.empty()
              ? provider_for(meta.embedder.id, meta.embedder.dimension)
              : provider_for("remote:" + sv_provider_url, meta.embedder.dimension);

      std::ofstream log_file;
      ServiceConfig cfg;
      std::tie(cfg.bind_host, cfg.port) = split_bind(sv_bind);
      cfg.k_default = sv_k;
      cfg.worker_threads = sv_threads;
      if (sv_log == "-") {
        cfg.request_log = &std::cerr;
      } else if (!sv_log.empty()) {
        log_file.open(sv_log, std::ios::app);
        if (!log_file) throw Error(ErrorCode::IoFailure, "cannot open '" + sv_log + "'");
        cfg.request_log = &log_file;
      }

      // Signals are taken synchronously by this thread; workers inherit the mask.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      RecommendationService service(std::move(indexes), provider, cfg);
      const int port = service.start();
      std::cerr << "listening on " << cfg.bind_host << ':' << port << std::endl;
      int sig = 0;
      sigwait(&signals, &sig);
      service.stop();
      return 0;
    }

    if (*load) {
      if (lt_think_min > lt_think_max)
        throw UsageError("--think-min-ms exceeds --think-max-ms");
      LoadTestConfig cfg;
      cfg.target_url = lt_url;
      cfg.users = lt_users;
      cfg.total_requests = lt_requests;
      cfg.seed = lt_seed;
      cfg.think = !lt_no_think;
      cfg.think_min = std::chrono::milliseconds(lt_think_min);
      cfg.think_max = std::chrono::milliseconds(lt_think_max);
      cfg.workloads = standard_workloads(lt_seed);
      const auto r = load_test(cfg);
      std::printf(
          "users,completed,failures,failure_rate,avg_rps,avg_ms,min_ms,max_ms,p90_ms\n"
          "%zu,%zu,%zu,%.6f,%.2f,%.2f,%.2f,%.2f,%.2f\n",
          r.users, r.completed, r.failures, r.failure_rate, r.avg_rps,
          r.response_ms.avg, r.response_ms.min, r.response_ms.max, r.response_ms.p90);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
