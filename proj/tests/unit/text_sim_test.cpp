#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "reclink/text_sim.hpp"

namespace reclink {
namespace {

// Full-table optimal string alignment distance, written independently of the
// library's rolling-row version.
std::size_t OsaOracle(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
      }
    }
  }
  return d[n][m];
}

std::string RandomWord(std::mt19937_64& rng, std::size_t max_len) {
  std::string s(rng() % (max_len + 1), 'A');
  for (auto& c : s) c = static_cast<char>('A' + rng() % 4);
  return s;
}

TEST(JaroWinkler, MarthaMarhta) {
  EXPECT_NEAR(Jaro("MARTHA", "MARHTA"), 17.0 / 18.0, 1e-12);
  // 17/18 + 3 * 0.1 * (1 - 17/18)
  EXPECT_NEAR(JaroWinkler("MARTHA", "MARHTA"), 0.961111111111111, 1e-9);
}

TEST(JaroWinkler, ClassicPairs) {
  EXPECT_NEAR(Jaro("DWAYNE", "DUANE"), 37.0 / 45.0, 1e-12);
  EXPECT_NEAR(JaroWinkler("DWAYNE", "DUANE"), 0.84, 1e-12);
  EXPECT_NEAR(Jaro("DIXON", "DICKSONX"), 23.0 / 30.0, 1e-12);
  EXPECT_NEAR(JaroWinkler("DIXON", "DICKSONX"), 0.8133333333333334, 1e-12);
}

TEST(JaroWinkler, Edges) {
  EXPECT_EQ(JaroWinkler("ABC", "ABC"), 1.0);
  EXPECT_EQ(JaroWinkler("ABC", "XYZ"), 0.0);
  EXPECT_EQ(JaroWinkler("", ""), 1.0);
  EXPECT_EQ(JaroWinkler("A", ""), 0.0);
  EXPECT_EQ(JaroWinkler("", "A"), 0.0);
}

TEST(JaroWinkler, PrefixCappedAtFour) {
  // Six shared leading characters still only earn a four-character boost.
  const double j = Jaro("ABCDEFXY", "ABCDEFYZ");
  EXPECT_NEAR(JaroWinkler("ABCDEFXY", "ABCDEFYZ"), j + 4 * 0.1 * (1 - j), 1e-12);
}

TEST(JaroWinkler, SymmetricAndBounded) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto a = RandomWord(rng, 8), b = RandomWord(rng, 8);
    const double ab = JaroWinkler(a, b);
    EXPECT_NEAR(ab, JaroWinkler(b, a), 1e-12) << a << " " << b;
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_GE(ab, Jaro(a, b) - 1e-15);
  }
}

TEST(Damerau, Examples) {
  EXPECT_EQ(DamerauLevenshtein("123456789", "123456789"), 0u);
  EXPECT_EQ(DamerauLevenshtein("123456789", "123465789"), 1u);
  EXPECT_EQ(DamerauLevenshtein("123456789", "123456"), 3u);
  EXPECT_EQ(DamerauLevenshtein("", "ABC"), 3u);
  EXPECT_EQ(DamerauLevenshtein("CA", "ABC"), 3u);  // OSA, not unrestricted (which gives 2)
  EXPECT_EQ(Levenshtein("123456789", "123465789"), 2u);
  EXPECT_EQ(Levenshtein("KITTEN", "SITTING"), 3u);
}

TEST(Damerau, MatchesFullTableOracle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const auto a = RandomWord(rng, 9), b = RandomWord(rng, 9);
    const auto osa = DamerauLevenshtein(a, b);
    ASSERT_EQ(osa, OsaOracle(a, b)) << a << " " << b;
    ASSERT_LE(osa, Levenshtein(a, b)) << a << " " << b;
    ASSERT_EQ(osa, DamerauLevenshtein(b, a));
  }
}

TEST(Soundex, CanonicalVector) {
  EXPECT_EQ(Soundex("ROBERT"), "R163");
  EXPECT_EQ(Soundex("RUPERT"), "R163");
  EXPECT_EQ(Soundex("A"), "A000");
  EXPECT_EQ(Soundex("RUBIN"), "R150");
  EXPECT_EQ(Soundex("ASHCRAFT"), "A261");  // H does not separate S and C
  EXPECT_EQ(Soundex("TYMCZAK"), "T522");
  EXPECT_EQ(Soundex("PFISTER"), "P236");   // first letter and its twin share code 1
  EXPECT_EQ(Soundex("HONEYMAN"), "H555");
  EXPECT_EQ(Soundex("SMITH"), "S530");
  EXPECT_EQ(Soundex("SMYTH"), "S530");
}

TEST(Soundex, CaseAndNoise) {
  EXPECT_EQ(Soundex("robert"), "R163");
  EXPECT_EQ(Soundex("O'BRIEN"), Soundex("OBRIEN"));
  EXPECT_EQ(Soundex(""), kSoundexEmpty);
  EXPECT_EQ(Soundex("123"), kSoundexEmpty);
}

}  // namespace
}  // namespace reclink
