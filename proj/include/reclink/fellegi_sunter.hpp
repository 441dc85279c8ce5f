#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "reclink/record.hpp"

namespace reclink {

enum class ComparatorKind : std::uint8_t { JaroWinklerGE, SameMonthYear, Exact, EditDistanceLE };

std::string_view ToString(ComparatorKind k);
std::optional<ComparatorKind> ComparatorKindFromString(std::string_view s);

/// One row of the linkage configuration: how a field is compared and the
/// m/u probabilities that weight its outcome.
struct FieldComparator {
  Field field = Field::FirstName;
  ComparatorKind kind = ComparatorKind::Exact;
  /// Similarity floor for JaroWinklerGE, maximum edits for EditDistanceLE.
  double threshold = 0.0;
  double m = 0.9;
  double u = 0.1;
};

class ComparatorConfig {
 public:
  ComparatorConfig() = default;
  /// Throws ConfigError when empty, when m <= u, or on an invalid threshold.
  explicit ComparatorConfig(std::vector<FieldComparator> comparators);

  /// Names/DOB/sex/SSN comparators from the registry linkage table plus an
  /// address comparator; m/u defaults meant to be re-estimated with EM.
  static ComparatorConfig Default();

  const std::vector<FieldComparator>& comparators() const { return comparators_; }
  std::size_t size() const { return comparators_.size(); }

  /// Same comparators with m/u replaced (sizes must match).
  ComparatorConfig WithParameters(std::span<const double> m, std::span<const double> u) const;

  nlohmann::json ToJson() const;
  /// Parses [{"field": "first_name", "kind": "jaro_winkler_ge", ...}]; unknown
  /// fields, kinds or keys raise ConfigError.
  static ComparatorConfig FromJson(const nlohmann::json& j);

 private:
  std::vector<FieldComparator> comparators_;
};

enum class Outcome : std::uint8_t { Agree, Disagree, Missing };

std::string_view ToString(Outcome o);

/// One outcome per configured comparator, in configuration order.
using AgreementVector = std::vector<Outcome>;

AgreementVector CompareFields(const RecordPair& p, const ComparatorConfig& config);

/// log2 weights contributed by a comparator's agree / disagree outcome.
struct FieldWeight {
  double agree = 0.0;
  double disagree = 0.0;
};

std::vector<FieldWeight> WeightsFrom(const ComparatorConfig& config);

struct PairScore {
  /// Sum of log2 likelihood ratios over non-missing fields.
  double total_weight = 0.0;
  /// Weight min-max normalised over the pair's non-missing fields; 0.5 if none.
  double overall_score = 0.5;
};

PairScore ScoreVector(std::span<const Outcome> v, std::span<const FieldWeight> weights);
PairScore ScoreVector(std::span<const Outcome> v, const ComparatorConfig& config);

bool AllMissing(std::span<const Outcome> v);

struct ScoredPair {
  PairIndex index;
  AgreementVector vector;
  PairScore score;
};

ScoredPair ScorePair(const Dataset& a, const Dataset& b, PairIndex index,
                     const ComparatorConfig& config);

/// CSV: left_id,right_id,<one outcome column per comparator>,total_weight,overall_score
void WriteScoresCsv(std::ostream& out, const Dataset& a, const Dataset& b,
                    const std::vector<ScoredPair>& scored, const ComparatorConfig& config);

/// Score band [lower, upper] splitting auto non-matches, reviews and auto matches.
struct ClassificationThresholds {
  double lower = 0.65;
  double upper = 1.0;

  /// Throws ConfigError unless 0 <= lower < upper <= 1.
  void Validate() const;
  double midpoint() const { return (lower + upper) / 2.0; }
};

enum class Classification : std::uint8_t { Match, NonMatch, Possible };

std::string_view ToString(Classification c);

/// score >= upper -> Match, score <= lower -> NonMatch, otherwise Possible.
/// Pairs with no comparable field are always Possible.
Classification Classify(const ScoredPair& s, const ClassificationThresholds& t);
Classification Classify(const PairScore& s, bool all_missing, const ClassificationThresholds& t);

struct EmInit {
  double m = 0.9;
  double u = 0.1;
  double prior = 0.1;
};

struct EmResult {
  std::vector<double> m;
  std::vector<double> u;
  double prior = 0.0;
  int iterations = 0;
  double log_likelihood = 0.0;
  /// Log-likelihood after each iteration, starting with the initial parameters.
  std::vector<double> log_likelihood_trace;
  bool converged = false;
  /// Inputs carry no information to separate the classes (identical vectors or
  /// a parameter pinned at the clamp bound).
  bool degenerate = false;
};

inline constexpr double kEmClamp = 1e-6;

/// Two-class latent mixture fitted by EM under conditional independence.
/// Missing outcomes drop out of that field's likelihood term. Stops when the
/// log-likelihood improvement falls below `tol` or after `max_iter` iterations.
EmResult EstimateParamsEm(std::span<const AgreementVector> vectors, EmInit init, double tol,
                          int max_iter);

}  // namespace reclink
