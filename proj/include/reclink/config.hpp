#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reclink/blocking.hpp"
#include "reclink/datagen.hpp"
#include "reclink/embedding.hpp"
#include "reclink/evaluation.hpp"
#include "reclink/fellegi_sunter.hpp"
#include "reclink/matching.hpp"

namespace reclink {

enum class BlockingMode : std::uint8_t { Rules, Knn, Hybrid };

std::string_view ToString(BlockingMode m);
std::optional<BlockingMode> BlockingModeFromString(std::string_view s);

struct EmbeddingSettings {
  std::string provider = "ngram_hash";  // or "remote"
  std::size_t dim = 256;
  std::size_t n = 3;
  RemoteEmbeddingConfig remote;

  std::unique_ptr<EmbeddingProvider> MakeProvider() const;
};

struct ReviewSettings {
  std::string host = "127.0.0.1";
  int port = 8088;
  std::string log_path = "review_log.jsonl";
  std::optional<std::string> static_dir;
  int lease_seconds = 600;
};

/// Input/output locations. Unset inputs default to files inside data_dir
/// (A.csv, B.csv, truth.csv) and unset outputs to out_dir.
struct PathSettings {
  std::string data_dir = ".";
  std::optional<std::string> out_dir;
  std::optional<std::string> a, b, truth, pairs, decisions, queue;
};

struct ScoringSettings {
  /// Re-estimate m/u with EM on the scored pairs before writing scores.
  bool em = false;
  double em_tol = 1e-8;
  int em_max_iter = 200;
};

/// Everything a pipeline run needs. Loaded from a JSON document; every
/// section is optional and unknown keys are rejected. ToJson() is the
/// resolved-config echo and parses back to an identical config.
struct RunConfig {
  std::uint64_t seed = 20210101;
  std::size_t threads = 0;  // 0 = one per processor
  PathSettings paths;
  CorpusSpec corpus;
  ComparatorConfig comparators = ComparatorConfig::Default();
  ScoringSettings scoring;

  BlockingMode blocking_mode = BlockingMode::Hybrid;
  std::vector<BlockKeyRule> rules = DefaultBlockRules();
  KnnParams knn{10, 0.75};
  ClassificationThresholds band{0.65, 1.0};

  EmbeddingSettings embedding;
  CascadePolicy cascade{{0.65, 1.0}, EscalationTarget::HumanQueue};
  std::optional<LlmEndpointConfig> llm;

  std::vector<std::size_t> sweep_k = DefaultSweepK();
  std::vector<double> sweep_tau = DefaultSweepTau();

  ReviewSettings review;

  /// Cross-field checks; throws ConfigError.
  void Validate() const;

  nlohmann::json ToJson() const;
  static RunConfig FromJson(const nlohmann::json& j);
  static RunConfig Load(const std::filesystem::path& path);
};

}  // namespace reclink
