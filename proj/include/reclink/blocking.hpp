#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reclink/embedding.hpp"
#include "reclink/fellegi_sunter.hpp"
#include "reclink/record.hpp"

namespace reclink {

enum class BlockKeyRule : std::uint8_t { SoundexFirstLast, ExactBirthDate, ExactSsn };

std::string_view ToString(BlockKeyRule r);
std::optional<BlockKeyRule> BlockKeyRuleFromString(std::string_view s);

/// The three key rules of the registry linkage table.
std::vector<BlockKeyRule> DefaultBlockRules();

/// Bit flags naming what produced a candidate pair.
enum Provenance : std::uint8_t {
  kProvSoundexFirstLast = 1 << 0,
  kProvExactBirthDate = 1 << 1,
  kProvExactSsn = 1 << 2,
  kProvKnn = 1 << 3,
};

/// "soundex_first_last+exact_ssn" style rendering of a provenance mask.
std::string ProvenanceString(std::uint8_t mask);

struct CandidatePair {
  PairIndex index;
  std::uint8_t provenance = 0;
  /// Cosine similarity for KNN pairs, overall score for hybrid pairs.
  std::optional<double> score;
};

/// Deduplicated candidate pairs, kept sorted by (left, right) position.
class CandidatePairSet {
 public:
  CandidatePairSet() = default;
  /// Sorts and merges duplicates (provenance OR-ed, first score kept).
  explicit CandidatePairSet(std::vector<CandidatePair> pairs);

  const std::vector<CandidatePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  bool Contains(PairIndex idx) const;
  const CandidatePair* Find(PairIndex idx) const;

  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

 private:
  std::vector<CandidatePair> pairs_;
};

/// Emits every cross-source pair sharing a block key under any rule. Records
/// missing a key's fields join no block for that rule. Throws ConfigError on
/// an empty rule list.
CandidatePairSet BlockByRules(const Dataset& a, const Dataset& b,
                              std::span<const BlockKeyRule> rules);

struct KnnParams {
  std::size_t k = 10;
  double tau = 0.75;
  void Validate() const;
};

/// Cosines closer than this rank as ties.
inline constexpr double kRankQuantum = 1e-10;

/// Ranked neighbours of every A record among B, best first, ties to the
/// smaller B index. Computed once and filtered per (k, tau).
class NeighborLists {
 public:
  struct Neighbor {
    std::uint32_t b = 0;
    double cosine = 0;
  };

  /// Exact search keeping the top `k_max` for every query row.
  static NeighborLists Build(std::span<const EmbeddingVector> a, std::span<const EmbeddingVector> b,
                             std::size_t k_max, std::size_t threads = 0);

  std::size_t k_max() const { return k_max_; }
  std::span<const Neighbor> of(std::size_t a_index) const;

  /// Top-k (k <= k_max) pairs with cosine strictly above tau; tau 0 keeps all.
  CandidatePairSet Filter(std::size_t k, double tau) const;

 private:
  std::size_t k_max_ = 0;
  std::size_t rows_ = 0;
  std::vector<Neighbor> flat_;  // rows_ * k_max_, row-major
};

/// Callback for non-fatal notices (k clamped to |B|, ...).
using Warn = std::function<void(const std::string&)>;

/// Serialises both sides for blocking, embeds them, and keeps each A
/// record's k most similar B records whose cosine exceeds tau.
CandidatePairSet BlockByKnn(const Dataset& a, const Dataset& b, const EmbeddingProvider& provider,
                            KnnParams params, std::size_t threads = 0, const Warn& warn = {});

struct HybridResult {
  CandidatePairSet auto_matches;
  std::size_t auto_nonmatches_count = 0;
  CandidatePairSet escalated;
  /// Scores for every rule candidate, aligned with `rule_candidates`.
  CandidatePairSet rule_candidates;
  std::vector<ScoredPair> scored;
};

/// Rule blocking followed by a score band: >= upper auto-matches, <= lower is
/// counted and dropped, the interior is escalated for review.
HybridResult HybridBlock(const Dataset& a, const Dataset& b, std::span<const BlockKeyRule> rules,
                         const ComparatorConfig& config, const ClassificationThresholds& band);

/// CSV: left_id,right_id,provenance,score (score empty when absent).
void WritePairsCsv(std::ostream& out, const Dataset& a, const Dataset& b,
                   const CandidatePairSet& pairs);
/// Reads a pair CSV back into positions; unknown ids raise DataError.
CandidatePairSet ReadPairsCsv(std::istream& in, const Dataset& a, const Dataset& b,
                              const std::string& label = "<pairs>");

}  // namespace reclink
