#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reclink/fellegi_sunter.hpp"
#include "reclink/record.hpp"

namespace reclink::review {

enum class ItemStatus : std::uint8_t { Pending, Decided, Skipped };
enum class ReviewVerdict : std::uint8_t { Match, NonMatch, Unsure };

std::string_view ToString(ItemStatus s);
std::string_view ToString(ReviewVerdict v);
std::optional<ReviewVerdict> ReviewVerdictFromString(std::string_view s);

/// One escalated pair as read from the queue file written by the matcher.
struct QueueEntry {
  PairId pair;
  double overall_score = 0.5;
  nlohmann::json outcomes = nlohmann::json::object();
  nlohmann::json left = nlohmann::json::object();
  nlohmann::json right = nlohmann::json::object();

  static QueueEntry FromJson(const nlohmann::json& j);
};

std::vector<QueueEntry> ReadQueueJsonl(const std::filesystem::path& path);

struct DecisionRecord {
  std::uint64_t seq = 0;
  std::string item_id;
  ReviewVerdict verdict = ReviewVerdict::Unsure;
  std::string reviewer_id;
  std::string timestamp;  // RFC 3339, UTC

  nlohmann::json ToJson() const;
  static DecisionRecord FromJson(const nlohmann::json& j);
};

struct ReviewItem {
  std::string item_id;
  QueueEntry entry;
  ItemStatus status = ItemStatus::Pending;
  /// Latest non-Unsure verdict once decided.
  std::optional<ReviewVerdict> verdict;
  std::optional<std::string> decided_by;
  std::vector<DecisionRecord> history;

  nlohmann::json ToJson() const;
};

struct Stats {
  /// Items still awaiting a Match/NonMatch verdict, Skipped ones included.
  std::size_t pending = 0;
  std::size_t decided = 0;
  /// Subset of `pending` whose last verdict was Unsure.
  std::size_t skipped = 0;
  std::size_t loaded = 0;

  nlohmann::json ToJson() const;
  friend bool operator==(const Stats&, const Stats&) = default;
};

/// Item id for a pair: "<left_id>:<right_id>".
std::string ItemIdFor(const PairId& p);

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InvalidTransition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct QueueOptions {
  std::filesystem::path log_path;
  ClassificationThresholds band;
  std::chrono::seconds lease{600};
  Clock clock;  // defaults to system_clock::now
};

/// Clerical-review queue backed by an append-only JSON Lines decision log.
///
/// Items are served most-ambiguous first (ascending distance of the score
/// from the band midpoint). An Unsure verdict marks the item Skipped and moves
/// it behind every other undecided item. Each decision is written and fsync'd
/// to the log before Submit returns, and the constructor replays an existing
/// log, so current state is always the fold of the log over the loaded queue.
///
/// Thread-safe. Mutations are serialised; reads take a shared lock.
class ReviewQueue {
 public:
  explicit ReviewQueue(QueueOptions options);
  ~ReviewQueue();
  ReviewQueue(const ReviewQueue&) = delete;
  ReviewQueue& operator=(const ReviewQueue&) = delete;

  /// Adds one Pending item per entry. Ids already present are skipped, so a
  /// reload is idempotent; duplicate pairs inside `entries` raise DataError.
  /// Decisions already in the log for these items are re-applied.
  void Load(const std::vector<QueueEntry>& entries);

  /// Highest-priority undecided item not leased to another reviewer, now
  /// leased to `reviewer_id`.
  std::optional<ReviewItem> Next(const std::string& reviewer_id);

  /// Appends to the log, then applies. Throws NotFound / InvalidTransition.
  DecisionRecord Submit(const std::string& item_id, ReviewVerdict verdict,
                        const std::string& reviewer_id);

  std::optional<ReviewItem> Item(const std::string& item_id) const;
  Stats GetStats() const;
  /// Undecided item ids in serving order.
  std::vector<std::string> ServingOrder() const;
  /// item_id,left_id,right_id,verdict,reviewer_id,timestamp for decided items,
  /// plus skipped ones (verdict "unsure") when requested.
  std::string ExportCsv(bool include_unsure = false) const;
  /// Canonical dump of all item state, for replay comparisons.
  nlohmann::json Snapshot() const;

 private:
  struct State;
  void Apply(const DecisionRecord& d);
  void AppendToLog(const DecisionRecord& d);
  std::string Now() const;

  QueueOptions options_;
  mutable std::shared_mutex mu_;
  std::unique_ptr<State> state_;
  int log_fd_ = -1;
};

/// HTTP+JSON front end for a ReviewQueue.
///
///   GET  /api/queue/next?reviewer=ID
///   POST /api/decisions        {"item_id", "verdict", "reviewer_id"}
///   GET  /api/items/{id}
///   GET  /api/stats
///   GET  /api/export?format=csv[&include_unsure=1]
///
/// Anything else is served from `static_dir` when set.
class ReviewServer {
 public:
  ReviewServer(ReviewQueue& queue, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ReviewServer();

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int Bind(const std::string& host, int port);
  /// Blocks serving requests until Stop().
  void Serve();
  void Stop();
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace reclink::review
