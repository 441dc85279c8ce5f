#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reclink/datagen.hpp"
#include "reclink/error.hpp"
#include "reclink/fellegi_sunter.hpp"

namespace reclink {
namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Datagen, DegenerateProfileGivesIdenticalPairs) {
  CorpusSpec spec;
  spec.n_persons = 300;
  spec.p_in_a = spec.p_in_b = 1.0;
  spec.perturb = {0, 0, 0, 0};
  spec.missing_ssn_b = spec.missing_addr_b = 0;
  const auto c = GenerateCorpus(spec);
  ASSERT_EQ(c.truth.size(), 300u);
  for (const auto& t : c.truth) {
    auto a = c.a[*c.a.IndexOf(t.left)];
    auto b = c.b[*c.b.IndexOf(t.right)];
    b.record_id = a.record_id;
    b.source = a.source;
    EXPECT_EQ(a, b);
  }
}

TEST(Datagen, MissingSsnRate) {
  CorpusSpec spec;
  spec.n_persons = 10000;
  spec.p_in_b = 1.0;
  spec.missing_ssn_b = 0.97;
  const auto c = GenerateCorpus(spec);
  std::size_t missing = 0;
  for (const auto& r : c.b.records()) missing += !r.ssn.has_value();
  EXPECT_NEAR(static_cast<double>(missing) / c.b.size(), 0.97, 0.01);
  for (const auto& r : c.a.records()) EXPECT_TRUE(r.ssn.has_value());
}

TEST(Datagen, DeterministicFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "reclink_datagen_det";
  std::filesystem::remove_all(dir);
  CorpusSpec spec;
  spec.n_persons = 500;
  WriteCorpus(GenerateCorpus(spec), dir / "one");
  WriteCorpus(GenerateCorpus(spec), dir / "two");
  for (const char* f : {"A.csv", "B.csv", "truth.csv"}) {
    const auto x = Slurp(dir / "one" / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, Slurp(dir / "two" / f)) << f;
  }
  spec.seed += 1;
  WriteCorpus(GenerateCorpus(spec), dir / "three");
  EXPECT_NE(Slurp(dir / "one" / "B.csv"), Slurp(dir / "three" / "B.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Datagen, TruthTracesToOneIdentity) {
  CorpusSpec spec;
  spec.n_persons = 2000;
  const auto c = GenerateCorpus(spec);
  std::map<std::string, int> left_uses, right_uses;
  for (const auto& t : c.truth) {
    ASSERT_TRUE(c.a.IndexOf(t.left).has_value());
    ASSERT_TRUE(c.b.IndexOf(t.right).has_value());
    EXPECT_EQ(++left_uses[t.left], 1);
    EXPECT_EQ(++right_uses[t.right], 1);
    // A is clean and every true pair shares the SSN when B kept it.
    const auto& a = c.a[*c.a.IndexOf(t.left)];
    const auto& b = c.b[*c.b.IndexOf(t.right)];
    if (b.ssn) EXPECT_EQ(a.ssn, b.ssn);
    EXPECT_EQ(a.sex, b.sex);
  }
}

TEST(Datagen, TrueMatchesScoreAboveLowerBand) {
  CorpusSpec spec;
  spec.n_persons = 3000;
  const auto c = GenerateCorpus(spec);
  const auto cfg = ComparatorConfig::Default();
  for (const auto& t : c.truth) {
    const auto ia = static_cast<std::uint32_t>(*c.a.IndexOf(t.left));
    const auto ib = static_cast<std::uint32_t>(*c.b.IndexOf(t.right));
    EXPECT_GT(ScorePair(c.a, c.b, {ia, ib}, cfg).score.overall_score, 0.65) << t.str();
  }
}

TEST(Datagen, SpecValidationAndJson) {
  CorpusSpec bad;
  bad.p_in_a = 1.5;
  EXPECT_THROW(GenerateCorpus(bad), ConfigError);
  CorpusSpec zero;
  zero.n_persons = 0;
  EXPECT_THROW(zero.Validate(), ConfigError);
  NamePools empty;
  EXPECT_THROW(GenerateCorpus(CorpusSpec{}, empty), ConfigError);

  CorpusSpec s;
  s.n_persons = 77;
  s.perturb.typo_rate = 0.5;
  EXPECT_EQ(CorpusSpec::FromJson(s.ToJson()).ToJson(), s.ToJson());
  auto j = s.ToJson();
  j["colour"] = 1;
  EXPECT_THROW(CorpusSpec::FromJson(j), ConfigError);
}

TEST(Datagen, TruthCsvRoundTrip) {
  std::vector<PairId> truth{{"A1", "B2"}, {"A3", "B4"}};
  std::ostringstream out;
  WriteTruthCsv(out, truth);
  std::istringstream in(out.str());
  EXPECT_EQ(ReadTruthCsv(in), truth);
  std::istringstream dup("left_id,right_id\nA1,B2\nA1,B2\n");
  EXPECT_THROW(ReadTruthCsv(dup), DataError);
}

}  // namespace
}  // namespace reclink
