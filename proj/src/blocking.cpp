#include "reclink/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "reclink/csv.hpp"
#include "reclink/error.hpp"
#include "reclink/parallel.hpp"
#include "reclink/text_sim.hpp"

namespace reclink {

std::string_view ToString(BlockKeyRule r) {
  switch (r) {
    case BlockKeyRule::SoundexFirstLast: return "soundex_first_last";
    case BlockKeyRule::ExactBirthDate: return "exact_birth_date";
    case BlockKeyRule::ExactSsn: return "exact_ssn";
  }
  return {};
}

std::optional<BlockKeyRule> BlockKeyRuleFromString(std::string_view s) {
  for (auto r : {BlockKeyRule::SoundexFirstLast, BlockKeyRule::ExactBirthDate,
                 BlockKeyRule::ExactSsn}) {
    if (ToString(r) == s) return r;
  }
  return std::nullopt;
}

std::vector<BlockKeyRule> DefaultBlockRules() {
  return {BlockKeyRule::SoundexFirstLast, BlockKeyRule::ExactBirthDate, BlockKeyRule::ExactSsn};
}

std::string ProvenanceString(std::uint8_t mask) {
  static constexpr std::pair<std::uint8_t, std::string_view> kNames[] = {
      {kProvSoundexFirstLast, "soundex_first_last"},
      {kProvExactBirthDate, "exact_birth_date"},
      {kProvExactSsn, "exact_ssn"},
      {kProvKnn, "knn"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (!(mask & bit)) continue;
    if (!out.empty()) out.push_back('+');
    out += name;
  }
  return out;
}

namespace {

std::uint8_t ProvenanceFromString(std::string_view s) {
  std::uint8_t mask = 0;
  while (!s.empty()) {
    const auto plus = s.find('+');
    const auto part = s.substr(0, plus);
    if (part == "knn") {
      mask |= kProvKnn;
    } else if (auto r = BlockKeyRuleFromString(part)) {
      mask |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(*r));
    } else if (!part.empty()) {
      throw DataError("unknown provenance \"" + std::string(part) + "\"");
    }
    if (plus == std::string_view::npos) break;
    s.remove_prefix(plus + 1);
  }
  return mask;
}

}  // namespace

CandidatePairSet::CandidatePairSet(std::vector<CandidatePair> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const CandidatePair& x, const CandidatePair& y) { return x.index < y.index; });
  for (auto& p : pairs) {
    if (!pairs_.empty() && pairs_.back().index == p.index) {
      pairs_.back().provenance |= p.provenance;
      if (!pairs_.back().score) pairs_.back().score = p.score;
    } else {
      pairs_.push_back(p);
    }
  }
}

const CandidatePair* CandidatePairSet::Find(PairIndex idx) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), idx,
                             [](const CandidatePair& p, PairIndex i) { return p.index < i; });
  if (it == pairs_.end() || it->index != idx) return nullptr;
  return &*it;
}

bool CandidatePairSet::Contains(PairIndex idx) const { return Find(idx) != nullptr; }

namespace {

std::optional<std::string> BlockKey(const PatientRecord& r, BlockKeyRule rule) {
  switch (rule) {
    case BlockKeyRule::SoundexFirstLast:
      if (!r.first_name || !r.last_name) return std::nullopt;
      return Soundex(*r.first_name) + "/" + Soundex(*r.last_name);
    case BlockKeyRule::ExactBirthDate:
      if (!r.birth_date) return std::nullopt;
      return FormatIsoDate(*r.birth_date);
    case BlockKeyRule::ExactSsn:
      return r.ssn;
  }
  return std::nullopt;
}

}  // namespace

CandidatePairSet BlockByRules(const Dataset& a, const Dataset& b,
                              std::span<const BlockKeyRule> rules) {
  if (rules.empty()) throw ConfigError("blocking rule list is empty");
  std::vector<CandidatePair> out;
  for (BlockKeyRule rule : rules) {
    const auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(rule));
    std::unordered_map<std::string, std::vector<std::uint32_t>> index;
    for (std::uint32_t j = 0; j < b.size(); ++j) {
      if (auto key = BlockKey(b[j], rule)) index[*key].push_back(j);
    }
    for (std::uint32_t i = 0; i < a.size(); ++i) {
      auto key = BlockKey(a[i], rule);
      if (!key) continue;
      auto it = index.find(*key);
      if (it == index.end()) continue;
      for (std::uint32_t j : it->second) out.push_back({{i, j}, bit, std::nullopt});
    }
  }
  return CandidatePairSet(std::move(out));
}

void KnnParams::Validate() const {
  if (k < 1) throw ConfigError("knn k must be >= 1");
  if (!(tau >= 0 && tau <= 1)) throw ConfigError("knn tau must lie in [0,1]");
}

NeighborLists NeighborLists::Build(std::span<const EmbeddingVector> a,
                                   std::span<const EmbeddingVector> b, std::size_t k_max,
                                   std::size_t threads) {
  NeighborLists lists;
  lists.k_max_ = std::min(k_max, b.size());
  lists.rows_ = a.size();
  lists.flat_.resize(lists.rows_ * lists.k_max_);
  if (lists.k_max_ == 0) return lists;

  // Equal cosines computed from different vectors can differ in the last
  // bits, so ranking uses the cosine rounded to kRankQuantum and ties then
  // fall to the smaller B index.
  struct Ranked {
    std::int64_t key;
    Neighbor n;
  };
  auto better = [](const Ranked& x, const Ranked& y) {
    return x.key != y.key ? x.key > y.key : x.n.b < y.n.b;
  };
  ParallelFor(a.size(), threads, [&](std::size_t i) {
    std::vector<Ranked> all(b.size());
    for (std::uint32_t j = 0; j < b.size(); ++j) {
      const double c = Cosine(a[i], b[j]);
      all[j] = {std::llround(c / kRankQuantum), {j, c}};
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(lists.k_max_),
                      all.end(), better);
    for (std::size_t r = 0; r < lists.k_max_; ++r) lists.flat_[i * lists.k_max_ + r] = all[r].n;
  });
  return lists;
}

std::span<const NeighborLists::Neighbor> NeighborLists::of(std::size_t a_index) const {
  return {flat_.data() + a_index * k_max_, k_max_};
}

CandidatePairSet NeighborLists::Filter(std::size_t k, double tau) const {
  if (k > k_max_) k = k_max_;
  std::vector<CandidatePair> out;
  for (std::uint32_t i = 0; i < rows_; ++i) {
    for (const auto& n : of(i).first(k)) {
      if (tau == 0.0 || n.cosine > tau) out.push_back({{i, n.b}, kProvKnn, n.cosine});
    }
  }
  return CandidatePairSet(std::move(out));
}

CandidatePairSet BlockByKnn(const Dataset& a, const Dataset& b, const EmbeddingProvider& provider,
                            KnnParams params, std::size_t threads, const Warn& warn) {
  params.Validate();
  if (params.k > b.size()) {
    if (warn) {
      warn("k=" + std::to_string(params.k) + " exceeds |B|=" + std::to_string(b.size()) +
           "; clamped");
    }
    params.k = b.size();
  }
  std::vector<std::string> a_text, b_text;
  a_text.reserve(a.size());
  b_text.reserve(b.size());
  for (const auto& r : a.records()) a_text.push_back(SerializeForBlocking(r));
  for (const auto& r : b.records()) b_text.push_back(SerializeForBlocking(r));
  const auto a_emb = provider.Embed(a_text);
  const auto b_emb = provider.Embed(b_text);
  return NeighborLists::Build(a_emb, b_emb, params.k, threads).Filter(params.k, params.tau);
}

HybridResult HybridBlock(const Dataset& a, const Dataset& b, std::span<const BlockKeyRule> rules,
                         const ComparatorConfig& config, const ClassificationThresholds& band) {
  band.Validate();
  HybridResult res;
  const auto candidates = BlockByRules(a, b, rules);
  const auto weights = WeightsFrom(config);

  std::vector<CandidatePair> rule_scored, matches, escalated;
  res.scored.reserve(candidates.size());
  for (const auto& c : candidates) {
    ScoredPair s;
    s.index = c.index;
    s.vector = CompareFields({a[c.index.left], b[c.index.right]}, config);
    s.score = ScoreVector(s.vector, weights);
    CandidatePair scored = c;
    scored.score = s.score.overall_score;
    rule_scored.push_back(scored);
    switch (Classify(s, band)) {
      case Classification::Match: matches.push_back(scored); break;
      case Classification::NonMatch: ++res.auto_nonmatches_count; break;
      case Classification::Possible: escalated.push_back(scored); break;
    }
    res.scored.push_back(std::move(s));
  }
  res.rule_candidates = CandidatePairSet(std::move(rule_scored));
  res.auto_matches = CandidatePairSet(std::move(matches));
  res.escalated = CandidatePairSet(std::move(escalated));
  return res;
}

namespace {

std::string FormatScore(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

void WritePairsCsv(std::ostream& out, const Dataset& a, const Dataset& b,
                   const CandidatePairSet& pairs) {
  csv::WriteRow(out, {"left_id", "right_id", "provenance", "score"});
  for (const auto& p : pairs) {
    csv::WriteRow(out, {a[p.index.left].record_id, b[p.index.right].record_id,
                        ProvenanceString(p.provenance), p.score ? FormatScore(*p.score) : ""});
  }
}

CandidatePairSet ReadPairsCsv(std::istream& in, const Dataset& a, const Dataset& b,
                              const std::string& label) {
  csv::Reader reader(in);
  auto header = reader.Next();
  if (!header || header->size() < 2 || (*header)[0] != "left_id" || (*header)[1] != "right_id") {
    throw DataError("expected a left_id,right_id header", label);
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col[(*header)[i]] = i;

  std::vector<CandidatePair> out;
  std::size_t row = 0;
  while (auto f = reader.Next()) {
    ++row;
    if (f->size() != header->size()) throw DataError("wrong field count", label, row);
    const auto l = a.IndexOf((*f)[0]);
    const auto r = b.IndexOf((*f)[1]);
    if (!l) throw DataError("unknown left_id " + (*f)[0], label, row);
    if (!r) throw DataError("unknown right_id " + (*f)[1], label, row);
    CandidatePair p{{static_cast<std::uint32_t>(*l), static_cast<std::uint32_t>(*r)}, 0, {}};
    try {
      if (auto it = col.find("provenance"); it != col.end()) {
        p.provenance = ProvenanceFromString((*f)[it->second]);
      }
    } catch (const DataError& e) {
      throw DataError(e.what(), label, row);
    }
    if (auto it = col.find("score"); it != col.end() && !(*f)[it->second].empty()) {
      try {
        p.score = std::stod((*f)[it->second]);
      } catch (const std::exception&) {
        throw DataError("malformed score", label, row);
      }
    }
    out.push_back(p);
  }
  return CandidatePairSet(std::move(out));
}

}  // namespace reclink
