#include "procomplete/embedder.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <mutex>

#include "procomplete/error.hpp"
#include "procomplete/text.hpp"

namespace procomplete {

Embedding Embedding::normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : values) v *= inv;
  }
  return Embedding(std::move(values));
}

bool Embedding::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0; });
}

std::vector<Embedding> EmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

// ---------------------------------------------------------------------------

HashEmbedder::HashEmbedder(std::size_t dimension)
    : descriptor_{std::string(kId), dimension} {
  if (dimension == 0)
    throw Error(ErrorCode::InvalidArgument, "embedding dimension must be > 0");
}

Embedding HashEmbedder::embed(std::string_view text) const {
  const std::size_t dim = descriptor_.dimension;
  std::vector<double> acc(dim, 0.0);
  auto add = [&](std::string_view feature) {
    const std::uint64_t h = fnv1a64(feature);
    acc[h % dim] += (h >> 63) == 0 ? 1.0 : -1.0;
  };
  const auto tokens = tokenize(text);
  std::string bigram;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) {
      bigram.assign(tokens[i]);
      bigram.push_back(' ');
      bigram.append(tokens[i + 1]);
      add(bigram);
    }
  }
  return Embedding::normalized(std::move(acc));
}

// ---------------------------------------------------------------------------

struct RemoteEmbedder::Endpoint {
  std::mutex mutex;
  std::unique_ptr<httplib::Client> client;
  std::string path;
};

RemoteEmbedder::RemoteEmbedder(std::string url, std::size_t dimension,
                               std::size_t batch_size,
                               std::chrono::milliseconds timeout)
    : descriptor_{"remote:" + url, dimension},
      batch_size_(std::max<std::size_t>(batch_size, 1)),
      timeout_(timeout),
      endpoint_(std::make_unique<Endpoint>()) {
  auto scheme_end = url.find("://");
  auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  endpoint_->path = path_start == std::string::npos ? "/" : url.substr(path_start);
  endpoint_->client = std::make_unique<httplib::Client>(url.substr(0, path_start));
  endpoint_->client->set_connection_timeout(timeout_);
  endpoint_->client->set_read_timeout(timeout_);
  endpoint_->client->set_write_timeout(timeout_);
}

RemoteEmbedder::~RemoteEmbedder() = default;

Embedding RemoteEmbedder::embed(std::string_view text) const {
  std::string owned(text);
  return embed_batch(std::span<const std::string>(&owned, 1)).front();
}

std::vector<Embedding> RemoteEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    auto chunk = texts.subspan(begin, std::min(batch_size_, texts.size() - begin));
    nlohmann::json body = {
        {"texts", std::vector<std::string>(chunk.begin(), chunk.end())}};

    httplib::Result res;
    {
      std::lock_guard lock(endpoint_->mutex);
      res = endpoint_->client->Post(endpoint_->path, body.dump(),
                                    "application/json");
    }
    if (!res)
      throw Error(ErrorCode::ProviderUnavailable,
                  "encoder unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw Error(ErrorCode::ProviderUnavailable,
                  "encoder returned HTTP " + std::to_string(res->status));

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ProviderUnavailable,
                  std::string("encoder reply is not JSON: ") + e.what());
    }
    const auto& rows = reply.at("embeddings");
    if (!rows.is_array() || rows.size() != chunk.size())
      throw Error(ErrorCode::DimensionMismatch,
                  "encoder returned wrong number of embeddings");
    for (const auto& row : rows) {
      auto values = row.get<std::vector<double>>();
      if (values.size() != descriptor_.dimension)
        throw Error(ErrorCode::DimensionMismatch,
                    "encoder returned dimension " +
                        std::to_string(values.size()) + ", expected " +
                        std::to_string(descriptor_.dimension));
      out.push_back(Embedding::normalized(std::move(values)));
    }
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(std::string_view spec,
                                                 std::size_t dimension) {
  if (spec.starts_with("remote:"))
    return std::make_unique<RemoteEmbedder>(std::string(spec.substr(7)),
                                            dimension);
  if (spec == HashEmbedder::kId) return std::make_unique<HashEmbedder>(dimension);
  if (spec.starts_with("hash-v1:")) {
    std::size_t dim = 0;
    try {
      dim = std::stoul(std::string(spec.substr(8)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument,
                  "bad provider spec '" + std::string(spec) + "'");
    }
    return std::make_unique<HashEmbedder>(dim);
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown provider '" + std::string(spec) + "'");
}

// ---------------------------------------------------------------------------

double cosine(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(p.size()) +
                    " and " + std::to_string(q.size()));
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0.0 || qq == 0.0) return 0.0;
  return dot / (std::sqrt(pp) * std::sqrt(qq));
}

SimilarityMatrix similarity_matrix(std::span<const Embedding> queries,
                                   std::span<const Embedding> corpus) {
  SimilarityMatrix m(queries.size(), corpus.size());
  if (queries.empty() || corpus.empty()) return m;

  const std::size_t dim = queries.front().dimension();
  auto check = [dim](const Embedding& e) {
    if (e.dimension() != dim)
      throw Error(ErrorCode::DimensionMismatch,
                  "similarity matrix over mixed dimensions " +
                      std::to_string(dim) + " and " +
                      std::to_string(e.dimension()));
  };
  std::for_each(queries.begin(), queries.end(), check);
  std::for_each(corpus.begin(), corpus.end(), check);

  auto norms = [](std::span<const Embedding> es) {
    std::vector<double> n(es.size());
    for (std::size_t i = 0; i < es.size(); ++i) {
      double sq = 0.0;
      for (double v : es[i].values()) sq += v * v;
      n[i] = std::sqrt(sq);
    }
    return n;
  };
  const auto qn = norms(queries);
  const auto cn = norms(corpus);

  // Tile over corpus columns so a block of corpus vectors stays in cache
  // while every query row is scored against it.
  constexpr std::size_t kBlock = 64;
  for (std::size_t j0 = 0; j0 < corpus.size(); j0 += kBlock) {
    const std::size_t j1 = std::min(j0 + kBlock, corpus.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto q = queries[i].values();
      for (std::size_t j = j0; j < j1; ++j) {
        if (qn[i] == 0.0 || cn[j] == 0.0) {
          m(i, j) = 0.0;
          continue;
        }
        const auto c = corpus[j].values();
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) dot += q[d] * c[d];
        m(i, j) = dot / (qn[i] * cn[j]);
      }
    }
  }
  return m;
}

}  // namespace procomplete
