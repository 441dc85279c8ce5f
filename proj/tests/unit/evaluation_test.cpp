#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "reclink/datagen.hpp"
#include "reclink/error.hpp"
#include "reclink/evaluation.hpp"

namespace reclink {
namespace {

std::vector<PairId> Ids(int from, int to) {
  std::vector<PairId> out;
  for (int i = from; i < to; ++i) out.push_back({"A" + std::to_string(i), "B" + std::to_string(i)});
  return out;
}

TEST(EvalMatching, F1HandArithmetic) {
  const auto r = MatchingReportFromCounts(8, 1, 1);
  EXPECT_NEAR(r.f1, 16.0 / 18.0, 1e-12);
  EXPECT_NEAR(r.precision, 8.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.recall, 8.0 / 9.0, 1e-12);
  EXPECT_EQ(MatchingReportFromCounts(0, 0, 0).f1, 0.0);
}

TEST(EvalMatching, FromDecisions) {
  const auto truth = Ids(0, 10);
  std::vector<MatchDecision> d;
  for (int i = 0; i < 9; ++i) d.push_back({{"A" + std::to_string(i), "B" + std::to_string(i)}, Verdict::Match});
  d.push_back({{"A9", "B9"}, Verdict::NonMatch});            // FN
  d.push_back({{"A1", "B2"}, Verdict::Match});               // FP
  d.push_back({{"A3", "B4"}, Verdict::NonMatch});            // TN
  const auto r = EvalMatching(d, truth);
  EXPECT_EQ(r.tp, 9u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_EQ(r.tn, 1u);
  EXPECT_NEAR(r.f1, 18.0 / 20.0, 1e-12);

  d.push_back({{"A1", "B2"}, Verdict::NonMatch});
  EXPECT_THROW(EvalMatching(d, truth), DataError);
}

TEST(EvalMatching, PerfectOracle) {
  const auto truth = Ids(0, 5);
  std::vector<MatchDecision> d;
  for (const auto& t : truth) d.push_back({t, Verdict::Match});
  const auto r = EvalMatching(d, truth);
  EXPECT_EQ(r.errors(), 0u);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(EvalBlocking, ReductionAgainstBaseline) {
  const auto candidates = Ids(0, 4250);
  const auto r = EvalBlocking(candidates, {}, 1000, 1000, 52917);
  ASSERT_TRUE(r.reduction_vs_baseline.has_value());
  EXPECT_NEAR(*r.reduction_vs_baseline, 0.9197, 1e-4);
  EXPECT_NEAR(*r.reduction_vs_baseline, 1.0 - 4250.0 / 52917.0, 1e-12);
  EXPECT_THROW(EvalBlocking(candidates, {}, 10, 10, 0), ConfigError);
}

TEST(EvalBlocking, CompletenessAndEmpty) {
  const auto truth = Ids(0, 10);
  auto all = Ids(0, 20);
  const auto full = EvalBlocking(all, truth, 20, 20);
  EXPECT_EQ(full.pairs_completeness, 1.0);
  EXPECT_NEAR(full.reduction_vs_cross, 1.0 - 20.0 / 400.0, 1e-12);
  const auto empty = EvalBlocking({}, truth, 20, 20);
  EXPECT_EQ(empty.pairs_completeness, 0.0);
  EXPECT_EQ(empty.true_matches_missed, 10u);
  EXPECT_FALSE(EvalBlocking({}, {}, 2, 2).pairs_completeness.has_value());
}

TEST(Sweep, LatticeShapeAndMonotonicity) {
  CorpusSpec spec;
  spec.n_persons = 400;
  const auto c = GenerateCorpus(spec);
  const std::size_t ks[] = {5, 10};
  const double taus[] = {0.5, 0.75};
  const auto grid = RunSweep(c.a, c.b, NgramHashProvider(), ks, taus, c.truth, 1);
  ASSERT_EQ(grid.rows.size(), 4u);
  EXPECT_EQ(grid.rows[0].k, 5u);
  EXPECT_EQ(grid.rows[1].tau, 0.75);
  EXPECT_GE(grid.rows[0].candidate_count, grid.rows[1].candidate_count);
  EXPECT_LE(grid.rows[0].candidate_count, grid.rows[2].candidate_count);
  EXPECT_LE(grid.rows[1].candidate_count, grid.rows[3].candidate_count);

  std::ostringstream csv, plot;
  WriteSweepCsv(csv, grid);
  WriteSweepPlotData(plot, grid);
  const auto text = csv.str();
  EXPECT_EQ(text.rfind("k,tau,candidate_count,missed,pairs_completeness\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(plot.str().rfind("k,tau,metric,value\n", 0), 0u);
}

TEST(Sweep, DefaultLattice) {
  EXPECT_EQ(DefaultSweepK(), (std::vector<std::size_t>{5, 10, 20, 30}));
  const auto t = DefaultSweepTau();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_DOUBLE_EQ(t.front(), 0.5);
  EXPECT_DOUBLE_EQ(t.back(), 0.95);
}

}  // namespace
}  // namespace reclink
