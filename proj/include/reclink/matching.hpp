#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "reclink/blocking.hpp"
#include "reclink/fellegi_sunter.hpp"
#include "reclink/record.hpp"

namespace reclink {

enum class Verdict : std::uint8_t { Match, NonMatch };
enum class Stage : std::uint8_t { Deterministic, Probabilistic, Llm, Human };

std::string_view ToString(Verdict v);
std::string_view ToString(Stage s);

struct MatchDecision {
  PairId pair;
  Verdict verdict = Verdict::NonMatch;
  Stage stage = Stage::Deterministic;
  std::optional<double> score;
  std::optional<std::string> raw_response;
};

/// Match iff first name, last name and full birth date are present on both
/// sides and identical.
MatchDecision MatchDeterministic(const RecordPair& p);

/// Match iff the normalised Fellegi-Sunter score reaches `cutoff`.
MatchDecision MatchProbabilistic(const RecordPair& p, const ComparatorConfig& config, double cutoff);

inline constexpr std::string_view kDefaultSystemPrompt = "You are a helpful assistant";

struct LlmEndpointConfig {
  std::string url;  // chat-completions style endpoint
  std::string model = "mistral-7b-instruct";
  double temperature = 0.0;
  /// Sent as the system message when set; reasoning models are run without one.
  std::optional<std::string> system_prompt = std::string(kDefaultSystemPrompt);
  int max_tokens = 8;
  int max_retries = 2;
  int timeout_ms = 60000;
  std::size_t parallelism = 1;

  void Validate() const;
};

/// The JSON request body sent for a pair.
nlohmann::json BuildChatRequest(const RecordPair& p, const LlmEndpointConfig& cfg);

/// Parses a reply. Surrounding whitespace and punctuation are ignored; the
/// remainder must be the single word yes or no (any case).
std::optional<Verdict> ParseYesNo(std::string_view reply);

/// Sends the rendered prompt and parses the answer. Unparseable replies are
/// retried up to cfg.max_retries times, then UnparseableResponse is thrown.
/// Transport failures raise TransportError.
MatchDecision MatchLlm(const RecordPair& p, const PairId& id, const LlmEndpointConfig& cfg);

enum class EscalationTarget : std::uint8_t { Llm, HumanQueue, NonMatchDefault };

std::string_view ToString(EscalationTarget t);
std::optional<EscalationTarget> EscalationTargetFromString(std::string_view s);

struct CascadePolicy {
  ClassificationThresholds band;
  EscalationTarget escalation_target = EscalationTarget::HumanQueue;
};

/// A pair waiting for clerical review, with everything a reviewer needs.
struct QueuedPair {
  PairIndex index;
  AgreementVector vector;
  PairScore score;
  /// Why it was queued: "band" or the LLM error text.
  std::string reason;
};

struct CascadeResult {
  /// Sorted by pair id.
  std::vector<MatchDecision> decisions;
  std::vector<QueuedPair> queued;
  std::size_t llm_calls = 0;
};

/// Scores every pair; those outside the open band are decided on score, the
/// interior goes to the escalation target. LLM failures fall back to the
/// human queue. Every input pair lands in exactly one of decisions / queued.
CascadeResult MatchCascade(const Dataset& a, const Dataset& b, const CandidatePairSet& pairs,
                           const CascadePolicy& policy, const ComparatorConfig& config,
                           const std::optional<LlmEndpointConfig>& llm = std::nullopt);

/// CSV: left_id,right_id,verdict,stage,score,raw_response.
void WriteDecisionsCsv(std::ostream& out, const std::vector<MatchDecision>& decisions);
std::vector<MatchDecision> ReadDecisionsCsv(std::istream& in, const std::string& label = "<decisions>");

/// One JSON object per line, the review service's queue input format.
void WriteQueueJsonl(std::ostream& out, const Dataset& a, const Dataset& b,
                     const std::vector<QueuedPair>& queued, const ComparatorConfig& config);

}  // namespace reclink
