#include "reclink/matching.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "http_client.hpp"
#include "reclink/csv.hpp"
#include "reclink/error.hpp"
#include "reclink/parallel.hpp"

namespace reclink {

std::string_view ToString(Verdict v) { return v == Verdict::Match ? "match" : "non_match"; }

std::string_view ToString(Stage s) {
  switch (s) {
    case Stage::Deterministic: return "deterministic";
    case Stage::Probabilistic: return "probabilistic";
    case Stage::Llm: return "llm";
    case Stage::Human: return "human";
  }
  return {};
}

std::string_view ToString(EscalationTarget t) {
  switch (t) {
    case EscalationTarget::Llm: return "llm";
    case EscalationTarget::HumanQueue: return "human_queue";
    case EscalationTarget::NonMatchDefault: return "non_match_default";
  }
  return {};
}

std::optional<EscalationTarget> EscalationTargetFromString(std::string_view s) {
  for (auto t : {EscalationTarget::Llm, EscalationTarget::HumanQueue,
                 EscalationTarget::NonMatchDefault}) {
    if (ToString(t) == s) return t;
  }
  return std::nullopt;
}

namespace {

PairId IdOf(const RecordPair& p) { return {p.left.record_id, p.right.record_id}; }

}  // namespace

MatchDecision MatchDeterministic(const RecordPair& p) {
  const auto& l = p.left;
  const auto& r = p.right;
  const bool match = l.first_name && r.first_name && l.last_name && r.last_name && l.birth_date &&
                     r.birth_date && *l.first_name == *r.first_name &&
                     *l.last_name == *r.last_name && *l.birth_date == *r.birth_date;
  return {IdOf(p), match ? Verdict::Match : Verdict::NonMatch, Stage::Deterministic, std::nullopt,
          std::nullopt};
}

MatchDecision MatchProbabilistic(const RecordPair& p, const ComparatorConfig& config,
                                 double cutoff) {
  if (!(cutoff >= 0 && cutoff <= 1)) throw ConfigError("probabilistic cutoff must lie in [0,1]");
  const auto score = ScoreVector(CompareFields(p, config), config);
  return {IdOf(p), score.overall_score >= cutoff ? Verdict::Match : Verdict::NonMatch,
          Stage::Probabilistic, score.overall_score, std::nullopt};
}

void LlmEndpointConfig::Validate() const {
  detail::SplitUrl(url);
  if (!(temperature >= 0)) throw ConfigError("llm temperature must be >= 0");
  if (max_retries < 0) throw ConfigError("llm max_retries must be >= 0");
  if (max_tokens < 1) throw ConfigError("llm max_tokens must be >= 1");
  if (timeout_ms < 1) throw ConfigError("llm timeout_ms must be >= 1");
}

nlohmann::json BuildChatRequest(const RecordPair& p, const LlmEndpointConfig& cfg) {
  auto messages = nlohmann::json::array();
  if (cfg.system_prompt) messages.push_back({{"role", "system"}, {"content", *cfg.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", RenderMatchPrompt(p)}});
  return {{"model", cfg.model},
          {"messages", std::move(messages)},
          {"temperature", cfg.temperature},
          {"max_tokens", cfg.max_tokens}};
}

std::optional<Verdict> ParseYesNo(std::string_view reply) {
  auto strip = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  while (!reply.empty() && strip(static_cast<unsigned char>(reply.front()))) reply.remove_prefix(1);
  while (!reply.empty() && strip(static_cast<unsigned char>(reply.back()))) reply.remove_suffix(1);
  std::string word(reply);
  for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (word == "yes") return Verdict::Match;
  if (word == "no") return Verdict::NonMatch;
  return std::nullopt;
}

MatchDecision MatchLlm(const RecordPair& p, const PairId& id, const LlmEndpointConfig& cfg) {
  const auto ep = detail::SplitUrl(cfg.url);
  const auto request = BuildChatRequest(p, cfg);
  std::string raw;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    const auto res = detail::PostJson(ep, request, cfg.timeout_ms);
    try {
      raw = res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw TransportError("malformed chat response for pair " + id.str());
    }
    if (auto v = ParseYesNo(raw)) return {id, *v, Stage::Llm, std::nullopt, raw};
  }
  throw UnparseableResponse(id.str(), raw);
}

CascadeResult MatchCascade(const Dataset& a, const Dataset& b, const CandidatePairSet& pairs,
                           const CascadePolicy& policy, const ComparatorConfig& config,
                           const std::optional<LlmEndpointConfig>& llm) {
  policy.band.Validate();
  if (policy.escalation_target == EscalationTarget::Llm) {
    if (!llm) throw ConfigError("escalation target llm requires an LLM endpoint config");
    llm->Validate();
  }
  const auto weights = WeightsFrom(config);

  CascadeResult res;
  std::vector<ScoredPair> interior;
  for (const auto& c : pairs) {
    ScoredPair s;
    s.index = c.index;
    s.vector = CompareFields({a[c.index.left], b[c.index.right]}, config);
    s.score = ScoreVector(s.vector, weights);
    const PairId id{a[c.index.left].record_id, b[c.index.right].record_id};
    switch (Classify(s, policy.band)) {
      case Classification::Match:
        res.decisions.push_back({id, Verdict::Match, Stage::Probabilistic, s.score.overall_score, {}});
        break;
      case Classification::NonMatch:
        res.decisions.push_back(
            {id, Verdict::NonMatch, Stage::Probabilistic, s.score.overall_score, {}});
        break;
      case Classification::Possible:
        interior.push_back(std::move(s));
        break;
    }
  }

  switch (policy.escalation_target) {
    case EscalationTarget::NonMatchDefault:
      for (const auto& s : interior) {
        res.decisions.push_back({{a[s.index.left].record_id, b[s.index.right].record_id},
                                 Verdict::NonMatch,
                                 Stage::Probabilistic,
                                 s.score.overall_score,
                                 {}});
      }
      break;
    case EscalationTarget::HumanQueue:
      for (auto& s : interior) {
        res.queued.push_back({s.index, std::move(s.vector), s.score, "band"});
      }
      break;
    case EscalationTarget::Llm: {
      std::vector<std::optional<MatchDecision>> answers(interior.size());
      std::vector<std::string> errors(interior.size());
      ParallelFor(interior.size(), std::max<std::size_t>(1, llm->parallelism), [&](std::size_t i) {
        const auto& s = interior[i];
        const RecordPair p{a[s.index.left], b[s.index.right]};
        try {
          auto d = MatchLlm(p, {p.left.record_id, p.right.record_id}, *llm);
          d.score = s.score.overall_score;
          answers[i] = std::move(d);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
      res.llm_calls = interior.size();
      for (std::size_t i = 0; i < interior.size(); ++i) {
        if (answers[i]) {
          res.decisions.push_back(std::move(*answers[i]));
        } else {
          res.queued.push_back(
              {interior[i].index, std::move(interior[i].vector), interior[i].score, errors[i]});
        }
      }
      break;
    }
  }

  std::sort(res.decisions.begin(), res.decisions.end(),
            [](const MatchDecision& x, const MatchDecision& y) { return x.pair < y.pair; });
  std::sort(res.queued.begin(), res.queued.end(), [&](const QueuedPair& x, const QueuedPair& y) {
    return PairId{a[x.index.left].record_id, b[x.index.right].record_id} <
           PairId{a[y.index.left].record_id, b[y.index.right].record_id};
  });
  return res;
}

namespace {

std::string FormatScore(const std::optional<double>& x) {
  if (!x) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *x);
  return buf;
}

}  // namespace

void WriteDecisionsCsv(std::ostream& out, const std::vector<MatchDecision>& decisions) {
  csv::WriteRow(out, {"left_id", "right_id", "verdict", "stage", "score", "raw_response"});
  for (const auto& d : decisions) {
    csv::WriteRow(out, {d.pair.left, d.pair.right, std::string(ToString(d.verdict)),
                        std::string(ToString(d.stage)), FormatScore(d.score),
                        d.raw_response.value_or("")});
  }
}

std::vector<MatchDecision> ReadDecisionsCsv(std::istream& in, const std::string& label) {
  csv::Reader reader(in);
  auto header = reader.Next();
  const csv::Row expected{"left_id", "right_id", "verdict", "stage", "score", "raw_response"};
  if (!header || *header != expected) throw DataError("unexpected decisions header", label);
  std::vector<MatchDecision> out;
  std::size_t row = 0;
  while (auto f = reader.Next()) {
    ++row;
    if (f->size() != expected.size()) throw DataError("wrong field count", label, row);
    MatchDecision d;
    d.pair = {(*f)[0], (*f)[1]};
    if ((*f)[2] == "match") {
      d.verdict = Verdict::Match;
    } else if ((*f)[2] == "non_match") {
      d.verdict = Verdict::NonMatch;
    } else {
      throw DataError("unknown verdict \"" + (*f)[2] + "\"", label, row);
    }
    bool stage_ok = false;
    for (auto s : {Stage::Deterministic, Stage::Probabilistic, Stage::Llm, Stage::Human}) {
      if (ToString(s) == (*f)[3]) {
        d.stage = s;
        stage_ok = true;
      }
    }
    if (!stage_ok) throw DataError("unknown stage \"" + (*f)[3] + "\"", label, row);
    if (!(*f)[4].empty()) d.score = std::stod((*f)[4]);
    if (!(*f)[5].empty()) d.raw_response = (*f)[5];
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

nlohmann::json RecordJson(const PatientRecord& r) {
  nlohmann::json j = {{"record_id", r.record_id}};
  for (Field f : kAllFields) {
    auto v = r.Text(f);
    j[std::string(ColumnName(f))] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  return j;
}

}  // namespace

void WriteQueueJsonl(std::ostream& out, const Dataset& a, const Dataset& b,
                     const std::vector<QueuedPair>& queued, const ComparatorConfig& config) {
  for (const auto& q : queued) {
    nlohmann::json outcomes = nlohmann::json::object();
    for (std::size_t i = 0; i < config.size(); ++i) {
      outcomes[std::string(ColumnName(config.comparators()[i].field))] = ToString(q.vector[i]);
    }
    nlohmann::json j = {{"left_id", a[q.index.left].record_id},
                        {"right_id", b[q.index.right].record_id},
                        {"overall_score", q.score.overall_score},
                        {"total_weight", q.score.total_weight},
                        {"outcomes", std::move(outcomes)},
                        {"left", RecordJson(a[q.index.left])},
                        {"right", RecordJson(b[q.index.right])},
                        {"reason", q.reason}};
    out << j.dump() << '\n';
  }
}

}  // namespace reclink
