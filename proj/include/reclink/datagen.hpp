#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "reclink/record.hpp"

namespace reclink {

/// Errors applied to the B-side copy of a person. Source A is the clean
/// registry; B is the noisy feed.
struct PerturbationProfile {
  /// Per name field: one substitution or adjacent transposition.
  double typo_rate = 0.04;
  /// First name replaced by a common nickname (when one exists).
  double nickname_swap_rate = 0.03;
  /// Day of birth moved within the same month.
  double dob_day_jitter_rate = 0.03;
  /// Upper bound on errors per B record; extra sampled errors are discarded.
  int max_errors_per_record = 1;
};

/// Two people born in the same month with the same sex never have all of
/// their names this Jaro-Winkler-close.
inline constexpr double kIdentityNameSeparation = 0.75;

struct CorpusSpec {
  std::size_t n_persons = 5000;
  double p_in_a = 0.8;
  double p_in_b = 0.6;
  PerturbationProfile perturb;
  /// Share of persons with no middle name (missing on both sides).
  double no_middle_name_rate = 0.05;
  double missing_ssn_b = 0.97;
  double missing_addr_b = 0.81;
  /// Zipf exponent for first and last name frequency; larger means more
  /// collisions. Middle names are drawn uniformly.
  double name_skew = 1.1;
  std::uint64_t seed = 20210101;

  /// Throws ConfigError for out-of-range probabilities or n_persons == 0.
  void Validate() const;
  nlohmann::json ToJson() const;
  /// Unknown keys raise ConfigError; absent keys keep their defaults.
  static CorpusSpec FromJson(const nlohmann::json& j);
};

/// Frequency-ranked name lists the generator samples from.
struct NamePools {
  std::vector<std::string> female_first;
  std::vector<std::string> male_first;
  std::vector<std::string> last;
  std::vector<std::string> streets;
  std::vector<std::pair<std::string, std::string>> nicknames;  // formal -> short

  /// The lists bundled with the library.
  static const NamePools& Bundled();
};

struct Corpus {
  Dataset a;
  Dataset b;
  /// Every (A, B) pair tracing to the same latent person, sorted.
  std::vector<PairId> truth;
};

/// Deterministic for a given spec (seed included) and pool set.
Corpus GenerateCorpus(const CorpusSpec& spec, const NamePools& pools = NamePools::Bundled());

/// Writes A.csv, B.csv and truth.csv into `dir` (created if needed).
void WriteCorpus(const Corpus& corpus, const std::filesystem::path& dir);

void WriteTruthCsv(std::ostream& out, const std::vector<PairId>& truth);
std::vector<PairId> ReadTruthCsv(std::istream& in, const std::string& label = "<truth>");

}  // namespace reclink
