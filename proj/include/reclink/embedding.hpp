#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reclink {

/// Dense vector, unit L2 norm unless `empty_input` (then all zeros).
struct EmbeddingVector {
  std::vector<double> values;
  bool empty_input = false;

  std::size_t dim() const { return values.size(); }
};

/// FNV-1a, 64-bit, standard offset basis. Pinned so hashed embeddings are
/// identical across runs, compilers and platforms.
std::uint64_t Fnv1a64(std::string_view bytes);

/// Character n-gram hashing embedder. The text is padded with one '#' on each
/// side, every byte n-gram is hashed into bucket `hash % dim`, counts are
/// accumulated, and the result is L2-normalised.
EmbeddingVector EmbedNgramHash(std::string_view text, std::size_t dim = 256, std::size_t n = 3);

/// Dot product of two normalised vectors. Throws std::invalid_argument on a
/// dimension mismatch; 0 when either side is the zero vector.
double Cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Rescales to unit norm; a zero vector is flagged empty instead.
void Normalize(EmbeddingVector& v);

struct RemoteEmbeddingConfig {
  std::string url;  // e.g. http://127.0.0.1:8080/embed
  std::size_t batch_size = 64;
  int timeout_ms = 30000;
  std::size_t parallelism = 1;
};

/// POSTs {"texts": [...]} per batch and expects {"embeddings": [[...], ...]}.
/// Any failure raises TransportError naming the batch; no partial results.
std::vector<EmbeddingVector> EmbedRemote(std::span<const std::string> texts,
                                         const RemoteEmbeddingConfig& cfg);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> Embed(std::span<const std::string> texts) const = 0;
  virtual std::string Describe() const = 0;
};

class NgramHashProvider final : public EmbeddingProvider {
 public:
  /// Throws ConfigError unless dim >= 16 and n in {2,3,4}.
  NgramHashProvider(std::size_t dim = 256, std::size_t n = 3);
  std::vector<EmbeddingVector> Embed(std::span<const std::string> texts) const override;
  std::string Describe() const override;

 private:
  std::size_t dim_;
  std::size_t n_;
};

class RemoteProvider final : public EmbeddingProvider {
 public:
  /// Throws ConfigError if batch_size is 0 or the URL is not http://.
  explicit RemoteProvider(RemoteEmbeddingConfig cfg);
  std::vector<EmbeddingVector> Embed(std::span<const std::string> texts) const override;
  std::string Describe() const override;

 private:
  RemoteEmbeddingConfig cfg_;
};

}  // namespace reclink
