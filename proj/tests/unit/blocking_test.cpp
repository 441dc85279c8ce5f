#include <gtest/gtest.h>

#include <cmath>

#include <algorithm>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "reclink/blocking.hpp"
#include "reclink/error.hpp"
#include "reclink/text_sim.hpp"

namespace reclink {
namespace {

using testing::D;
using testing::RandomDataset;
using testing::Rec;

std::set<std::pair<std::uint32_t, std::uint32_t>> AsSet(const CandidatePairSet& s) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (const auto& p : s) out.emplace(p.index.left, p.index.right);
  return out;
}

// All-pairs cosine, per-left top-k with ties to the smaller B index, then the
// strict tau filter.
std::set<std::pair<std::uint32_t, std::uint32_t>> BruteForceKnn(const Dataset& a, const Dataset& b,
                                                                std::size_t k, double tau) {
  std::vector<EmbeddingVector> eb;
  for (const auto& r : b.records()) eb.push_back(EmbedNgramHash(SerializeForBlocking(r)));
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    const auto ea = EmbedNgramHash(SerializeForBlocking(a[i]));
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t j = 0; j < b.size(); ++j) all.emplace_back(Cosine(ea, eb[j]), j);
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      if (std::abs(x.first - y.first) > 1e-12) return x.first > y.first;
      return x.second < y.second;
    });
    for (std::size_t r = 0; r < std::min(k, all.size()); ++r) {
      if (tau == 0.0 || all[r].first > tau) out.emplace(i, all[r].second);
    }
  }
  return out;
}

TEST(Rules, SoundexFirstLast) {
  const Dataset a(Source::A, {Rec("a1", Source::A, "ROBERT", "", "SMITH", D(1970, 1, 1), "M")});
  const Dataset b(Source::B, {Rec("b1", Source::B, "RUPERT", "", "SMYTH", D(1980, 2, 2), "M")});
  const auto pairs = BlockByRules(a, b, DefaultBlockRules());
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs.pairs()[0].provenance, kProvSoundexFirstLast);
}

TEST(Rules, MissingSsnJoinsNoBlock) {
  const Dataset a(Source::A, {Rec("a1", Source::A, "ANN", "", "LEE", D(1970, 1, 1), "F")});
  const Dataset b(Source::B, {Rec("b1", Source::B, "PETER", "", "DOE", D(1980, 2, 2), "M")});
  const BlockKeyRule ssn[] = {BlockKeyRule::ExactSsn};
  EXPECT_TRUE(BlockByRules(a, b, ssn).empty());
}

TEST(Rules, DuplicatesMergedWithBothTags) {
  const Dataset a(Source::A, {Rec("a1", Source::A, "ANN", "", "LEE", D(1970, 1, 1), "F", "123456789")});
  const Dataset b(Source::B, {Rec("b1", Source::B, "PETER", "", "DOE", D(1970, 1, 1), "M", "123456789")});
  const auto pairs = BlockByRules(a, b, DefaultBlockRules());
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs.pairs()[0].provenance, kProvExactBirthDate | kProvExactSsn);
  EXPECT_EQ(ProvenanceString(pairs.pairs()[0].provenance), "exact_birth_date+exact_ssn");
}

TEST(Rules, EmptyRuleListRejected) {
  const Dataset a(Source::A, {});
  const Dataset b(Source::B, {});
  EXPECT_THROW(BlockByRules(a, b, {}), ConfigError);
}

TEST(Rules, MatchesNestedLoopOracle) {
  const Dataset a = RandomDataset(Source::A, 40, 1);
  const Dataset b = RandomDataset(Source::B, 35, 2);
  std::set<std::pair<std::uint32_t, std::uint32_t>> expect;
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    for (std::uint32_t j = 0; j < b.size(); ++j) {
      const auto &x = a[i], &y = b[j];
      const bool sx = x.first_name && x.last_name && y.first_name && y.last_name &&
                      Soundex(*x.first_name) == Soundex(*y.first_name) &&
                      Soundex(*x.last_name) == Soundex(*y.last_name);
      const bool dob = x.birth_date && y.birth_date && *x.birth_date == *y.birth_date;
      if (sx || dob) expect.emplace(i, j);
    }
  }
  EXPECT_EQ(AsSet(BlockByRules(a, b, DefaultBlockRules())), expect);
}

TEST(Knn, FiveByFiveOracle) {
  const Dataset a = RandomDataset(Source::A, 5, 10);
  const Dataset b = RandomDataset(Source::B, 5, 11);
  const NgramHashProvider provider;
  EXPECT_EQ(AsSet(BlockByKnn(a, b, provider, {2, 0.5})), BruteForceKnn(a, b, 2, 0.5));
}

TEST(Knn, FixturesUpTo50MatchOracle) {
  const NgramHashProvider provider;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t na = 1 + seed * 4, nb = 50 - seed * 3;
    const Dataset a = RandomDataset(Source::A, na, 100 + seed);
    const Dataset b = RandomDataset(Source::B, nb, 200 + seed);
    for (std::size_t k : {1, 3, 10}) {
      for (double tau : {0.0, 0.5, 0.75, 0.9}) {
        ASSERT_EQ(AsSet(BlockByKnn(a, b, provider, {k, tau})), BruteForceKnn(a, b, k, tau))
            << "seed " << seed << " k " << k << " tau " << tau;
      }
    }
  }
}

TEST(Knn, FullCrossProductAtTauZero) {
  const Dataset a = RandomDataset(Source::A, 7, 3);
  const Dataset b = RandomDataset(Source::B, 9, 4);
  const auto pairs = BlockByKnn(a, b, NgramHashProvider(), {9, 0.0});
  EXPECT_EQ(pairs.size(), 63u);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.provenance, kProvKnn);
    ASSERT_TRUE(p.score.has_value());
  }
}

TEST(Knn, ClampsKWithWarning) {
  const Dataset a = RandomDataset(Source::A, 3, 3);
  const Dataset b = RandomDataset(Source::B, 2, 4);
  std::vector<std::string> warnings;
  const auto pairs = BlockByKnn(a, b, NgramHashProvider(), {10, 0.0}, 1,
                                [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_EQ(pairs.size(), 6u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Knn, PlantedDuplicateSurvivesNearOneThreshold) {
  std::vector<PatientRecord> ra{Rec("a1", Source::A, "JOHN", "A", "DOE", D(1970, 1, 1), "M"),
                                Rec("a2", Source::A, "MARY", "", "ROE", D(1955, 12, 31), "F")};
  std::vector<PatientRecord> rb{Rec("b1", Source::B, "JOHM", "A", "DOE", D(1970, 1, 1), "M"),
                                Rec("b2", Source::B, "MARY", "", "ROE", D(1955, 12, 31), "F"),
                                Rec("b3", Source::B, "PETER", "", "LEE", D(1990, 5, 5), "M")};
  const Dataset a(Source::A, ra), b(Source::B, rb);
  const auto pairs = BlockByKnn(a, b, NgramHashProvider(), {3, 0.9999});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs.pairs()[0].index, (PairIndex{1, 1}));
}

TEST(Knn, MonotoneInKAndTau) {
  const Dataset a = RandomDataset(Source::A, 50, 5);
  const Dataset b = RandomDataset(Source::B, 50, 6);
  const NgramHashProvider provider;
  std::vector<EmbeddingVector> ea, eb;
  for (const auto& r : a.records()) ea.push_back(EmbedNgramHash(SerializeForBlocking(r)));
  for (const auto& r : b.records()) eb.push_back(EmbedNgramHash(SerializeForBlocking(r)));
  const auto lists = NeighborLists::Build(ea, eb, 30);
  const std::size_t ks[] = {5, 10, 20, 30};
  const double taus[] = {0.5, 0.6, 0.7, 0.8, 0.9};
  for (std::size_t ki = 0; ki < 4; ++ki) {
    for (std::size_t ti = 0; ti < 5; ++ti) {
      const auto s = AsSet(lists.Filter(ks[ki], taus[ti]));
      if (ti + 1 < 5) {
        const auto tighter = AsSet(lists.Filter(ks[ki], taus[ti + 1]));
        EXPECT_TRUE(std::includes(s.begin(), s.end(), tighter.begin(), tighter.end()));
      }
      if (ki + 1 < 4) {
        const auto wider = AsSet(lists.Filter(ks[ki + 1], taus[ti]));
        EXPECT_TRUE(std::includes(wider.begin(), wider.end(), s.begin(), s.end()));
      }
    }
  }
}

TEST(Knn, ThreadCountDoesNotChangeResult) {
  const Dataset a = RandomDataset(Source::A, 50, 8);
  const Dataset b = RandomDataset(Source::B, 50, 9);
  const NgramHashProvider provider;
  EXPECT_EQ(AsSet(BlockByKnn(a, b, provider, {5, 0.6}, 1)), AsSet(BlockByKnn(a, b, provider, {5, 0.6}, 4)));
}

TEST(Hybrid, PlantedPairs) {
  std::vector<PatientRecord> ra{
      Rec("a1", Source::A, "JOHN", "A", "DOE", D(1970, 1, 1), "M", "123456789", "12 MAIN ST"),
      Rec("a2", Source::A, "MARY", "", "ROE", D(1955, 12, 31), "F")};
  std::vector<PatientRecord> rb{
      Rec("b1", Source::B, "JOHN", "A", "DOE", D(1970, 1, 1), "M", "123456789", "12 MAIN ST"),
      // Same birth date and sex as a2, different names.
      Rec("b2", Source::B, "PETRA", "", "SMITH", D(1955, 12, 31), "F")};
  const Dataset a(Source::A, ra), b(Source::B, rb);
  const auto h = HybridBlock(a, b, DefaultBlockRules(), ComparatorConfig::Default(), {0.65, 1.0});
  EXPECT_TRUE(h.auto_matches.Contains({0, 0}));
  EXPECT_FALSE(h.escalated.Contains({1, 1}));
  EXPECT_FALSE(h.auto_matches.Contains({1, 1}));
  EXPECT_EQ(h.auto_nonmatches_count, 1u);
  EXPECT_EQ(h.rule_candidates.size(), h.scored.size());
}

TEST(Hybrid, OnlySexAgreesScoresBelowBand) {
  const auto cfg = ComparatorConfig::Default();
  AgreementVector v(cfg.size(), Outcome::Disagree);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    if (cfg.comparators()[i].field == Field::Sex) v[i] = Outcome::Agree;
  }
  const auto w = WeightsFrom(cfg);
  double lo = 0, hi = 0, total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    lo += w[i].disagree;
    hi += w[i].agree;
    total += v[i] == Outcome::Agree ? w[i].agree : w[i].disagree;
  }
  const double expect = (total - lo) / (hi - lo);
  EXPECT_NEAR(ScoreVector(v, cfg).overall_score, expect, 1e-12);
  EXPECT_LT(expect, 0.65);
}

TEST(PairsCsv, RoundTrip) {
  const Dataset a = RandomDataset(Source::A, 20, 1);
  const Dataset b = RandomDataset(Source::B, 20, 2);
  const auto pairs = BlockByKnn(a, b, NgramHashProvider(), {3, 0.5});
  std::ostringstream out;
  WritePairsCsv(out, a, b, pairs);
  std::istringstream in(out.str());
  const auto back = ReadPairsCsv(in, a, b);
  EXPECT_EQ(AsSet(back), AsSet(pairs));
  std::istringstream bad("left_id,right_id,provenance,score\nA0,NOPE,knn,\n");
  EXPECT_THROW(ReadPairsCsv(bad, a, b), DataError);
}

}  // namespace
}  // namespace reclink
