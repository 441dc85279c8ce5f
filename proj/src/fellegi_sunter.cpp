#include "reclink/fellegi_sunter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "reclink/csv.hpp"
#include "reclink/error.hpp"
#include "reclink/text_sim.hpp"

namespace reclink {

std::string_view ToString(ComparatorKind k) {
  switch (k) {
    case ComparatorKind::JaroWinklerGE: return "jaro_winkler_ge";
    case ComparatorKind::SameMonthYear: return "same_month_year";
    case ComparatorKind::Exact: return "exact";
    case ComparatorKind::EditDistanceLE: return "edit_distance_le";
  }
  return {};
}

std::optional<ComparatorKind> ComparatorKindFromString(std::string_view s) {
  for (auto k : {ComparatorKind::JaroWinklerGE, ComparatorKind::SameMonthYear,
                 ComparatorKind::Exact, ComparatorKind::EditDistanceLE}) {
    if (ToString(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view ToString(Outcome o) {
  switch (o) {
    case Outcome::Agree: return "agree";
    case Outcome::Disagree: return "disagree";
    case Outcome::Missing: return "missing";
  }
  return {};
}

std::string_view ToString(Classification c) {
  switch (c) {
    case Classification::Match: return "match";
    case Classification::NonMatch: return "non_match";
    case Classification::Possible: return "possible";
  }
  return {};
}

ComparatorConfig::ComparatorConfig(std::vector<FieldComparator> comparators)
    : comparators_(std::move(comparators)) {
  if (comparators_.empty()) throw ConfigError("comparator list is empty");
  std::set<Field> seen;
  for (const auto& c : comparators_) {
    const std::string name(ColumnName(c.field));
    if (!seen.insert(c.field).second) throw ConfigError("duplicate comparator for " + name);
    if (!(c.m > 0 && c.m < 1 && c.u > 0 && c.u < 1)) {
      throw ConfigError(name + ": m and u must lie in (0,1)");
    }
    if (!(c.m > c.u)) throw ConfigError(name + ": m must exceed u");
    switch (c.kind) {
      case ComparatorKind::JaroWinklerGE:
        if (!(c.threshold >= 0 && c.threshold <= 1)) {
          throw ConfigError(name + ": Jaro-Winkler threshold must be in [0,1]");
        }
        break;
      case ComparatorKind::EditDistanceLE:
        if (!(c.threshold >= 0) || c.threshold != std::floor(c.threshold)) {
          throw ConfigError(name + ": edit distance bound must be a non-negative integer");
        }
        break;
      case ComparatorKind::SameMonthYear:
        if (c.field != Field::BirthDate) {
          throw ConfigError(name + ": same_month_year applies to birth_date only");
        }
        break;
      case ComparatorKind::Exact:
        break;
    }
  }
}

ComparatorConfig ComparatorConfig::Default() {
  using K = ComparatorKind;
  return ComparatorConfig({
      {Field::FirstName, K::JaroWinklerGE, 0.8, 0.92, 0.004},
      {Field::MiddleName, K::JaroWinklerGE, 0.8, 0.92, 0.004},
      {Field::LastName, K::JaroWinklerGE, 0.8, 0.92, 0.004},
      {Field::BirthDate, K::SameMonthYear, 0.0, 0.97, 0.003},
      {Field::Ssn, K::EditDistanceLE, 2.0, 0.95, 1e-6},
      {Field::Sex, K::Exact, 0.0, 0.98, 0.5},
      {Field::Address, K::JaroWinklerGE, 0.8, 0.7, 0.01},
  });
}

ComparatorConfig ComparatorConfig::WithParameters(std::span<const double> m,
                                                  std::span<const double> u) const {
  if (m.size() != comparators_.size() || u.size() != comparators_.size()) {
    throw ConfigError("parameter count does not match comparator count");
  }
  auto copy = comparators_;
  for (std::size_t i = 0; i < copy.size(); ++i) {
    copy[i].m = m[i];
    copy[i].u = u[i];
  }
  return ComparatorConfig(std::move(copy));
}

nlohmann::json ComparatorConfig::ToJson() const {
  auto arr = nlohmann::json::array();
  for (const auto& c : comparators_) {
    arr.push_back({{"field", ColumnName(c.field)},
                   {"kind", ToString(c.kind)},
                   {"threshold", c.threshold},
                   {"m", c.m},
                   {"u", c.u}});
  }
  return arr;
}

ComparatorConfig ComparatorConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("comparators must be an array");
  std::vector<FieldComparator> out;
  for (const auto& item : j) {
    if (!item.is_object()) throw ConfigError("comparator entries must be objects");
    for (const auto& [key, _] : item.items()) {
      if (key != "field" && key != "kind" && key != "threshold" && key != "m" && key != "u") {
        throw ConfigError("unknown comparator key \"" + key + "\"");
      }
    }
    FieldComparator c;
    const auto field_name = item.value("field", std::string{});
    const auto field = FieldFromColumn(field_name);
    if (!field) throw ConfigError("unknown field \"" + field_name + "\" in comparator config");
    c.field = *field;
    const auto kind_name = item.value("kind", std::string{});
    const auto kind = ComparatorKindFromString(kind_name);
    if (!kind) throw ConfigError("unknown comparator kind \"" + kind_name + "\"");
    c.kind = *kind;
    c.threshold = item.value("threshold", 0.0);
    c.m = item.value("m", 0.9);
    c.u = item.value("u", 0.1);
    out.push_back(c);
  }
  return ComparatorConfig(std::move(out));
}

namespace {

Outcome Compare(const PatientRecord& l, const PatientRecord& r, const FieldComparator& c) {
  if (c.kind == ComparatorKind::SameMonthYear) {
    if (!l.birth_date || !r.birth_date) return Outcome::Missing;
    return l.birth_date->year() == r.birth_date->year() &&
                   l.birth_date->month() == r.birth_date->month()
               ? Outcome::Agree
               : Outcome::Disagree;
  }
  const auto lv = l.Text(c.field);
  const auto rv = r.Text(c.field);
  if (!lv || !rv) return Outcome::Missing;
  bool agree = false;
  switch (c.kind) {
    case ComparatorKind::JaroWinklerGE: agree = JaroWinkler(*lv, *rv) >= c.threshold; break;
    case ComparatorKind::Exact: agree = *lv == *rv; break;
    case ComparatorKind::EditDistanceLE:
      agree = static_cast<double>(DamerauLevenshtein(*lv, *rv)) <= c.threshold;
      break;
    case ComparatorKind::SameMonthYear: break;
  }
  return agree ? Outcome::Agree : Outcome::Disagree;
}

}  // namespace

AgreementVector CompareFields(const RecordPair& p, const ComparatorConfig& config) {
  if (config.size() == 0) throw ConfigError("comparator list is empty");
  AgreementVector v;
  v.reserve(config.size());
  for (const auto& c : config.comparators()) v.push_back(Compare(p.left, p.right, c));
  return v;
}

std::vector<FieldWeight> WeightsFrom(const ComparatorConfig& config) {
  std::vector<FieldWeight> w;
  w.reserve(config.size());
  for (const auto& c : config.comparators()) {
    w.push_back({std::log2(c.m / c.u), std::log2((1.0 - c.m) / (1.0 - c.u))});
  }
  return w;
}

bool AllMissing(std::span<const Outcome> v) {
  return std::all_of(v.begin(), v.end(), [](Outcome o) { return o == Outcome::Missing; });
}

PairScore ScoreVector(std::span<const Outcome> v, std::span<const FieldWeight> weights) {
  if (v.size() != weights.size()) throw ConfigError("agreement vector / weight size mismatch");
  double total = 0, w_max = 0, w_min = 0;
  bool any_agree = false, any_disagree = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == Outcome::Missing) continue;
    w_max += weights[i].agree;
    w_min += weights[i].disagree;
    if (v[i] == Outcome::Agree) {
      total += weights[i].agree;
      any_agree = true;
    } else {
      total += weights[i].disagree;
      any_disagree = true;
    }
  }
  PairScore s;
  s.total_weight = total;
  if (!any_agree && !any_disagree) {
    s.overall_score = 0.5;
  } else if (!any_disagree) {
    s.overall_score = 1.0;
  } else if (!any_agree) {
    s.overall_score = 0.0;
  } else {
    s.overall_score = std::clamp((total - w_min) / (w_max - w_min), 0.0, 1.0);
  }
  return s;
}

PairScore ScoreVector(std::span<const Outcome> v, const ComparatorConfig& config) {
  const auto w = WeightsFrom(config);
  return ScoreVector(v, w);
}

ScoredPair ScorePair(const Dataset& a, const Dataset& b, PairIndex index,
                     const ComparatorConfig& config) {
  ScoredPair s;
  s.index = index;
  s.vector = CompareFields({a[index.left], b[index.right]}, config);
  s.score = ScoreVector(s.vector, config);
  return s;
}

void WriteScoresCsv(std::ostream& out, const Dataset& a, const Dataset& b,
                    const std::vector<ScoredPair>& scored, const ComparatorConfig& config) {
  csv::Row header{"left_id", "right_id"};
  for (const auto& c : config.comparators()) header.emplace_back(ColumnName(c.field));
  header.emplace_back("total_weight");
  header.emplace_back("overall_score");
  csv::WriteRow(out, header);
  char buf[32];
  for (const auto& s : scored) {
    csv::Row row{a[s.index.left].record_id, b[s.index.right].record_id};
    for (Outcome o : s.vector) row.emplace_back(ToString(o));
    std::snprintf(buf, sizeof buf, "%.6f", s.score.total_weight);
    row.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%.6f", s.score.overall_score);
    row.emplace_back(buf);
    csv::WriteRow(out, row);
  }
}

void ClassificationThresholds::Validate() const {
  if (!(lower >= 0 && lower < upper && upper <= 1)) {
    throw ConfigError("classification band must satisfy 0 <= lower < upper <= 1");
  }
}

Classification Classify(const PairScore& s, bool all_missing, const ClassificationThresholds& t) {
  if (all_missing) return Classification::Possible;
  if (s.overall_score >= t.upper) return Classification::Match;
  if (s.overall_score <= t.lower) return Classification::NonMatch;
  return Classification::Possible;
}

Classification Classify(const ScoredPair& s, const ClassificationThresholds& t) {
  return Classify(s.score, AllMissing(s.vector), t);
}

namespace {

double LogLikelihood(std::span<const AgreementVector> vectors, const std::vector<double>& m,
                     const std::vector<double>& u, double prior,
                     std::vector<double>* posterior) {
  double ll = 0;
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    double log_match = std::log(prior), log_non = std::log(1.0 - prior);
    for (std::size_t j = 0; j < m.size(); ++j) {
      const Outcome o = vectors[r][j];
      if (o == Outcome::Missing) continue;
      const bool agree = o == Outcome::Agree;
      log_match += std::log(agree ? m[j] : 1.0 - m[j]);
      log_non += std::log(agree ? u[j] : 1.0 - u[j]);
    }
    const double hi = std::max(log_match, log_non);
    const double log_total = hi + std::log(std::exp(log_match - hi) + std::exp(log_non - hi));
    ll += log_total;
    if (posterior) (*posterior)[r] = std::exp(log_match - log_total);
  }
  return ll;
}

double Clamp(double x) { return std::clamp(x, kEmClamp, 1.0 - kEmClamp); }

}  // namespace

EmResult EstimateParamsEm(std::span<const AgreementVector> vectors, EmInit init, double tol,
                          int max_iter) {
  if (vectors.size() < 2) throw ConfigError("EM needs at least two agreement vectors");
  for (double p : {init.m, init.u, init.prior}) {
    if (!(p > 0 && p < 1)) throw ConfigError("EM initial values must lie in (0,1)");
  }
  if (max_iter < 1) throw ConfigError("EM max_iter must be at least 1");
  const std::size_t fields = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != fields) throw ConfigError("agreement vectors have differing lengths");
  }

  EmResult res;
  res.m.assign(fields, init.m);
  res.u.assign(fields, init.u);
  res.prior = init.prior;

  std::vector<double> g(vectors.size());
  double ll = LogLikelihood(vectors, res.m, res.u, res.prior, &g);
  res.log_likelihood_trace.push_back(ll);

  while (res.iterations < max_iter) {
    // M-step using posteriors g from the current parameters.
    std::vector<double> agree_m(fields, 0), total_m(fields, 0), agree_u(fields, 0),
        total_u(fields, 0);
    double g_sum = 0;
    for (std::size_t r = 0; r < vectors.size(); ++r) {
      g_sum += g[r];
      for (std::size_t j = 0; j < fields; ++j) {
        const Outcome o = vectors[r][j];
        if (o == Outcome::Missing) continue;
        total_m[j] += g[r];
        total_u[j] += 1.0 - g[r];
        if (o == Outcome::Agree) {
          agree_m[j] += g[r];
          agree_u[j] += 1.0 - g[r];
        }
      }
    }
    for (std::size_t j = 0; j < fields; ++j) {
      if (total_m[j] > 0) res.m[j] = Clamp(agree_m[j] / total_m[j]);
      if (total_u[j] > 0) res.u[j] = Clamp(agree_u[j] / total_u[j]);
    }
    res.prior = Clamp(g_sum / static_cast<double>(vectors.size()));
    ++res.iterations;

    // E-step for the next round; also yields the new log-likelihood.
    const double next = LogLikelihood(vectors, res.m, res.u, res.prior, &g);
    res.log_likelihood_trace.push_back(next);
    const double improvement = next - ll;
    ll = next;
    if (improvement < tol) {
      res.converged = true;
      break;
    }
  }
  res.log_likelihood = ll;

  const bool identical = std::all_of(vectors.begin(), vectors.end(),
                                     [&](const AgreementVector& v) { return v == vectors.front(); });
  auto pinned = [](double x) { return x <= kEmClamp || x >= 1.0 - kEmClamp; };
  const bool clamped = std::any_of(res.m.begin(), res.m.end(), pinned) &&
                       std::any_of(res.u.begin(), res.u.end(), pinned) &&
                       std::equal(res.m.begin(), res.m.end(), res.u.begin());
  res.degenerate = identical || clamped;
  return res;
}

}  // namespace reclink
