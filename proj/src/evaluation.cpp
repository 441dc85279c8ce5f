#include "reclink/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "reclink/csv.hpp"
#include "reclink/error.hpp"

namespace reclink {

namespace {

std::string Fixed(double x, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

template <typename T>
nlohmann::json OrNull(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json BlockingReport::ToJson() const {
  return {{"candidate_count", candidate_count},
          {"true_matches_total", true_matches_total},
          {"true_matches_missed", true_matches_missed},
          {"pairs_completeness", OrNull(pairs_completeness)},
          {"reduction_vs_cross", reduction_vs_cross},
          {"reduction_vs_baseline", OrNull(reduction_vs_baseline)}};
}

BlockingReport EvalBlocking(std::span<const PairId> candidates, std::span<const PairId> truth,
                            std::size_t a_size, std::size_t b_size,
                            std::optional<std::size_t> baseline_count) {
  if (baseline_count && *baseline_count == 0) throw ConfigError("baseline_count must be > 0");
  const std::set<PairId> cand(candidates.begin(), candidates.end());
  BlockingReport r;
  r.candidate_count = cand.size();
  const std::set<PairId> t(truth.begin(), truth.end());
  r.true_matches_total = t.size();
  for (const auto& p : t) {
    if (!cand.contains(p)) ++r.true_matches_missed;
  }
  if (r.true_matches_total > 0) {
    r.pairs_completeness = 1.0 - static_cast<double>(r.true_matches_missed) /
                                     static_cast<double>(r.true_matches_total);
  }
  const double cross = static_cast<double>(a_size) * static_cast<double>(b_size);
  r.reduction_vs_cross = cross > 0 ? 1.0 - static_cast<double>(r.candidate_count) / cross : 0.0;
  if (baseline_count) {
    r.reduction_vs_baseline =
        1.0 - static_cast<double>(r.candidate_count) / static_cast<double>(*baseline_count);
  }
  return r;
}

std::vector<PairId> PairIds(const Dataset& a, const Dataset& b, const CandidatePairSet& pairs) {
  std::vector<PairId> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({a[p.index.left].record_id, b[p.index.right].record_id});
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json MatchingReport::ToJson() const {
  return {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}, {"fp_plus_fn", errors()},
          {"precision", precision}, {"recall", recall}, {"f1", f1}};
}

MatchingReport MatchingReportFromCounts(std::size_t tp, std::size_t fp, std::size_t fn,
                                        std::size_t tn) {
  MatchingReport r{tp, fp, fn, tn};
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  r.precision = tp + fp ? d(tp) / d(tp + fp) : 0.0;
  r.recall = tp + fn ? d(tp) / d(tp + fn) : 0.0;
  r.f1 = 2 * tp + fp + fn ? 2.0 * d(tp) / d(2 * tp + fp + fn) : 0.0;
  return r;
}

MatchingReport EvalMatching(std::span<const MatchDecision> decisions, std::span<const PairId> truth) {
  const std::set<PairId> t(truth.begin(), truth.end());
  std::set<PairId> seen;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& d : decisions) {
    if (!seen.insert(d.pair).second) throw DataError("duplicate decision for pair " + d.pair.str());
    const bool is_match = t.contains(d.pair);
    const bool said_match = d.verdict == Verdict::Match;
    if (said_match && is_match) ++tp;
    else if (said_match) ++fp;
    else if (is_match) ++fn;
    else ++tn;
  }
  return MatchingReportFromCounts(tp, fp, fn, tn);
}

std::vector<std::size_t> DefaultSweepK() { return {5, 10, 20, 30}; }

std::vector<double> DefaultSweepTau() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(0.5 + 0.05 * i);
  return out;
}

SweepGrid RunSweep(const Dataset& a, const Dataset& b, const EmbeddingProvider& provider,
                   std::span<const std::size_t> k_set, std::span<const double> tau_set,
                   std::span<const PairId> truth, std::size_t threads) {
  if (k_set.empty() || tau_set.empty()) throw ConfigError("sweep needs non-empty k and tau sets");
  for (auto k : k_set) KnnParams{k, 0.5}.Validate();
  for (auto tau : tau_set) KnnParams{1, tau}.Validate();

  std::vector<std::string> a_text, b_text;
  for (const auto& r : a.records()) a_text.push_back(SerializeForBlocking(r));
  for (const auto& r : b.records()) b_text.push_back(SerializeForBlocking(r));
  const auto a_emb = provider.Embed(a_text);
  const auto b_emb = provider.Embed(b_text);
  const auto k_max = *std::max_element(k_set.begin(), k_set.end());
  const auto lists = NeighborLists::Build(a_emb, b_emb, k_max, threads);

  std::vector<std::size_t> ks(k_set.begin(), k_set.end());
  std::vector<double> taus(tau_set.begin(), tau_set.end());
  std::sort(ks.begin(), ks.end());
  std::sort(taus.begin(), taus.end());

  SweepGrid grid;
  for (auto k : ks) {
    for (auto tau : taus) {
      const auto ids = PairIds(a, b, lists.Filter(k, tau));
      const auto rep = EvalBlocking(ids, truth, a.size(), b.size());
      grid.rows.push_back({k, tau, rep.candidate_count, rep.true_matches_missed,
                           rep.pairs_completeness});
    }
  }
  return grid;
}

void WriteSweepCsv(std::ostream& out, const SweepGrid& grid) {
  csv::WriteRow(out, {"k", "tau", "candidate_count", "missed", "pairs_completeness"});
  for (const auto& r : grid.rows) {
    csv::WriteRow(out, {std::to_string(r.k), Fixed(r.tau, 2), std::to_string(r.candidate_count),
                        std::to_string(r.missed),
                        r.pairs_completeness ? Fixed(*r.pairs_completeness) : ""});
  }
}

void WriteSweepPlotData(std::ostream& out, const SweepGrid& grid) {
  csv::WriteRow(out, {"k", "tau", "metric", "value"});
  for (const auto& r : grid.rows) {
    const auto k = std::to_string(r.k);
    const auto tau = Fixed(r.tau, 2);
    csv::WriteRow(out, {k, tau, "candidate_count", std::to_string(r.candidate_count)});
    csv::WriteRow(out, {k, tau, "missed", std::to_string(r.missed)});
    if (r.pairs_completeness) {
      csv::WriteRow(out, {k, tau, "pairs_completeness", Fixed(*r.pairs_completeness)});
    }
  }
}

void WriteScoreDistributionCsv(std::ostream& out, const Dataset& a, const Dataset& b,
                               const std::vector<ScoredPair>& scored, std::span<const PairId> truth) {
  const std::set<PairId> t(truth.begin(), truth.end());
  csv::WriteRow(out, {"left_id", "right_id", "overall_score", "total_weight", "is_match"});
  for (const auto& s : scored) {
    PairId id{a[s.index.left].record_id, b[s.index.right].record_id};
    const bool m = t.contains(id);
    csv::WriteRow(out, {id.left, id.right, Fixed(s.score.overall_score),
                        Fixed(s.score.total_weight), m ? "1" : "0"});
  }
}

}  // namespace reclink
