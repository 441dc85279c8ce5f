#include "reclink/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "http_client.hpp"
#include "reclink/error.hpp"
#include "reclink/parallel.hpp"

namespace reclink {

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Normalize(EmbeddingVector& v) {
  double sq = 0;
  for (double x : v.values) sq += x * x;
  if (sq == 0) {
    v.empty_input = true;
    return;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v.values) x *= inv;
}

EmbeddingVector EmbedNgramHash(std::string_view text, std::size_t dim, std::size_t n) {
  EmbeddingVector v;
  v.values.assign(dim, 0.0);
  if (text.empty()) {
    v.empty_input = true;
    return v;
  }
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back('#');
  padded.append(text);
  padded.push_back('#');
  const std::string_view p(padded);
  if (p.size() < n) {
    v.values[Fnv1a64(p) % dim] += 1.0;
  } else {
    for (std::size_t i = 0; i + n <= p.size(); ++i) v.values[Fnv1a64(p.substr(i, n)) % dim] += 1.0;
  }
  Normalize(v);
  return v;
}

double Cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.dim()) +
                                " vs " + std::to_string(v.dim()) + ")");
  }
  if (u.empty_input || v.empty_input) return 0.0;
  double dot = 0;
  for (std::size_t i = 0; i < u.dim(); ++i) dot += u.values[i] * v.values[i];
  return dot;
}

std::vector<EmbeddingVector> EmbedRemote(std::span<const std::string> texts,
                                         const RemoteEmbeddingConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("embedding batch_size must be >= 1");
  if (texts.empty()) return {};
  const auto ep = detail::SplitUrl(cfg.url);
  const std::size_t batches = (texts.size() + cfg.batch_size - 1) / cfg.batch_size;

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> dims(batches, 0);
  ParallelFor(batches, std::max<std::size_t>(1, cfg.parallelism), [&](std::size_t b) {
    const std::size_t begin = b * cfg.batch_size;
    const std::size_t end = std::min(texts.size(), begin + cfg.batch_size);
    nlohmann::json req = {{"texts", nlohmann::json::array()}};
    for (std::size_t i = begin; i < end; ++i) req["texts"].push_back(texts[i]);

    const auto res = detail::PostJson(ep, req, cfg.timeout_ms, static_cast<long>(b));
    const auto it = res.find("embeddings");
    if (it == res.end() || !it->is_array()) {
      throw TransportError("response lacks an \"embeddings\" array", static_cast<long>(b));
    }
    if (it->size() != end - begin) {
      throw TransportError("count mismatch: sent " + std::to_string(end - begin) +
                               " texts, got " + std::to_string(it->size()) + " embeddings",
                           static_cast<long>(b));
    }
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& row = (*it)[k];
      if (!row.is_array() || row.empty()) {
        throw TransportError("embedding " + std::to_string(k) + " is not a non-empty array",
                             static_cast<long>(b));
      }
      if (k > 0 && row.size() != out[begin].values.size()) {
        throw TransportError("ragged embedding dimensions", static_cast<long>(b));
      }
      EmbeddingVector v;
      v.values.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw TransportError("non-numeric embedding value", static_cast<long>(b));
        v.values.push_back(x.get<double>());
      }
      Normalize(v);
      out[begin + k] = std::move(v);
    }
    dims[b] = out[begin].values.size();
  });
  for (std::size_t b = 1; b < batches; ++b) {
    if (dims[b] != dims[0]) throw TransportError("ragged embedding dimensions", static_cast<long>(b));
  }
  return out;
}

NgramHashProvider::NgramHashProvider(std::size_t dim, std::size_t n) : dim_(dim), n_(n) {
  if (dim < 16) throw ConfigError("ngram embedding dim must be >= 16");
  if (n < 2 || n > 4) throw ConfigError("ngram size must be 2, 3 or 4");
}

std::vector<EmbeddingVector> NgramHashProvider::Embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(EmbedNgramHash(t, dim_, n_));
  return out;
}

std::string NgramHashProvider::Describe() const {
  return "ngram_hash(dim=" + std::to_string(dim_) + ", n=" + std::to_string(n_) + ")";
}

RemoteProvider::RemoteProvider(RemoteEmbeddingConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.batch_size == 0) throw ConfigError("embedding batch_size must be >= 1");
  detail::SplitUrl(cfg_.url);
}

std::vector<EmbeddingVector> RemoteProvider::Embed(std::span<const std::string> texts) const {
  return EmbedRemote(texts, cfg_);
}

std::string RemoteProvider::Describe() const { return "remote(" + cfg_.url + ")"; }

}  // namespace reclink
