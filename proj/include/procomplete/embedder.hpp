#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace procomplete {

/// Fixed-length vector for one paragraph. Stored unit-length, or all zeros
/// for text without tokens.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}

  /// Scales to unit L2 norm; the zero vector stays zero.
  static Embedding normalized(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  bool is_zero() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<double> values_;
};

struct EmbedderDescriptor {
  std::string id;
  std::size_t dimension = 512;

  friend bool operator==(const EmbedderDescriptor&,
                         const EmbedderDescriptor&) = default;
};

/// Provider contract: deterministic per descriptor id and safe to call from
/// several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const EmbedderDescriptor& descriptor() const noexcept = 0;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::vector<Embedding> embed_batch(
      std::span<const std::string> texts) const;
};

/// Feature-hashing provider "hash-v1": unigrams and adjacent-token bigrams,
/// FNV-1a 64 bucketed modulo the dimension, signed by bit 63.
class HashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::string_view kId = "hash-v1";

  explicit HashEmbedder(std::size_t dimension = 512);

  const EmbedderDescriptor& descriptor() const noexcept override {
    return descriptor_;
  }
  Embedding embed(std::string_view text) const override;

 private:
  EmbedderDescriptor descriptor_;
};

/// Client for an external encoder speaking
///   POST <url> {"texts": [...]}  ->  {"embeddings": [[...], ...]}
/// Vectors are normalized on receipt. Throws Error(ProviderUnavailable) on
/// transport failures and Error(DimensionMismatch) on wrong-length vectors.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  RemoteEmbedder(std::string url, std::size_t dimension,
                 std::size_t batch_size = 64,
                 std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~RemoteEmbedder() override;

  const EmbedderDescriptor& descriptor() const noexcept override {
    return descriptor_;
  }
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(
      std::span<const std::string> texts) const override;

 private:
  struct Endpoint;
  EmbedderDescriptor descriptor_;
  std::size_t batch_size_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<Endpoint> endpoint_;
};

/// Builds a provider from a spec string: "hash-v1", "hash-v1:<dim>" or
/// "remote:<url>" (dimension taken from `dimension`).
std::unique_ptr<EmbeddingProvider> make_provider(std::string_view spec,
                                                 std::size_t dimension = 512);

/// Cosine similarity; 0 when either side is the zero vector.
/// Throws Error(DimensionMismatch).
double cosine(std::span<const double> p, std::span<const double> q);
inline double cosine(const Embedding& p, const Embedding& q) {
  return cosine(p.values(), q.values());
}

/// Row-major r x m matrix of cosines between query and corpus embeddings.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Throws Error(DimensionMismatch) unless all vectors share one dimension.
SimilarityMatrix similarity_matrix(std::span<const Embedding> queries,
                                   std::span<const Embedding> corpus);

}  // namespace procomplete
