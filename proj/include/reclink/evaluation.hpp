#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "reclink/blocking.hpp"
#include "reclink/matching.hpp"
#include "reclink/record.hpp"

namespace reclink {

struct BlockingReport {
  std::size_t candidate_count = 0;
  std::size_t true_matches_total = 0;
  std::size_t true_matches_missed = 0;
  /// Blocking recall; nullopt when there are no true matches.
  std::optional<double> pairs_completeness;
  double reduction_vs_cross = 0;
  std::optional<double> reduction_vs_baseline;

  nlohmann::json ToJson() const;
};

/// Compares candidate pair ids against ground truth. `baseline_count`, when
/// given, must be positive (ConfigError otherwise).
BlockingReport EvalBlocking(std::span<const PairId> candidates, std::span<const PairId> truth,
                            std::size_t a_size, std::size_t b_size,
                            std::optional<std::size_t> baseline_count = std::nullopt);

/// Pair ids of a candidate set, sorted.
std::vector<PairId> PairIds(const Dataset& a, const Dataset& b, const CandidatePairSet& pairs);

struct MatchingReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0, recall = 0, f1 = 0;

  std::size_t errors() const { return fp + fn; }
  nlohmann::json ToJson() const;
};

/// Precision, recall and Match-class F1 from confusion counts; each is 0 when
/// its denominator is 0.
MatchingReport MatchingReportFromCounts(std::size_t tp, std::size_t fp, std::size_t fn,
                                        std::size_t tn = 0);

/// Confusion counts over the decided pairs; pairs absent from truth are
/// non-matches. Duplicate decisions for a pair raise DataError.
MatchingReport EvalMatching(std::span<const MatchDecision> decisions, std::span<const PairId> truth);

struct SweepRow {
  std::size_t k = 0;
  double tau = 0;
  std::size_t candidate_count = 0;
  std::size_t missed = 0;
  std::optional<double> pairs_completeness;
};

struct SweepGrid {
  std::vector<SweepRow> rows;  // k-major, tau ascending within k
};

/// k in {5,10,20,30}.
std::vector<std::size_t> DefaultSweepK();
/// tau in {0.50, 0.55, ..., 0.95}.
std::vector<double> DefaultSweepTau();

/// One KNN blocking run per (k, tau); embeddings and neighbour lists are
/// computed once for the largest k and filtered per lattice point.
SweepGrid RunSweep(const Dataset& a, const Dataset& b, const EmbeddingProvider& provider,
                   std::span<const std::size_t> k_set, std::span<const double> tau_set,
                   std::span<const PairId> truth, std::size_t threads = 0);

/// k,tau,candidate_count,missed,pairs_completeness
void WriteSweepCsv(std::ostream& out, const SweepGrid& grid);
/// Long format for charting: k,tau,metric,value
void WriteSweepPlotData(std::ostream& out, const SweepGrid& grid);

/// left_id,right_id,overall_score,total_weight,is_match - score distribution
/// export for strip plots.
void WriteScoreDistributionCsv(std::ostream& out, const Dataset& a, const Dataset& b,
                               const std::vector<ScoredPair>& scored, std::span<const PairId> truth);

}  // namespace reclink
