#include "reclink/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <tuple>

#include <httplib.h>

#include "reclink/csv.hpp"
#include "reclink/error.hpp"

namespace reclink::review {

std::string_view ToString(ItemStatus s) {
  switch (s) {
    case ItemStatus::Pending: return "pending";
    case ItemStatus::Decided: return "decided";
    case ItemStatus::Skipped: return "skipped";
  }
  return {};
}

std::string_view ToString(ReviewVerdict v) {
  switch (v) {
    case ReviewVerdict::Match: return "match";
    case ReviewVerdict::NonMatch: return "non_match";
    case ReviewVerdict::Unsure: return "unsure";
  }
  return {};
}

std::optional<ReviewVerdict> ReviewVerdictFromString(std::string_view s) {
  for (auto v : {ReviewVerdict::Match, ReviewVerdict::NonMatch, ReviewVerdict::Unsure}) {
    if (ToString(v) == s) return v;
  }
  return std::nullopt;
}

std::string ItemIdFor(const PairId& p) { return p.left + ":" + p.right; }

QueueEntry QueueEntry::FromJson(const nlohmann::json& j) {
  QueueEntry e;
  try {
    e.pair = {j.at("left_id").get<std::string>(), j.at("right_id").get<std::string>()};
    e.overall_score = j.at("overall_score").get<double>();
    if (j.contains("outcomes")) e.outcomes = j.at("outcomes");
    if (j.contains("left")) e.left = j.at("left");
    if (j.contains("right")) e.right = j.at("right");
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("queue entry: ") + ex.what());
  }
  return e;
}

std::vector<QueueEntry> ReadQueueJsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open queue file", path.string());
  std::vector<QueueEntry> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      out.push_back(QueueEntry::FromJson(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError(e.what(), path.string(), row);
    }
  }
  return out;
}

nlohmann::json DecisionRecord::ToJson() const {
  return {{"seq", seq},
          {"item_id", item_id},
          {"verdict", ToString(verdict)},
          {"reviewer_id", reviewer_id},
          {"timestamp", timestamp}};
}

DecisionRecord DecisionRecord::FromJson(const nlohmann::json& j) {
  DecisionRecord d;
  d.seq = j.at("seq").get<std::uint64_t>();
  d.item_id = j.at("item_id").get<std::string>();
  const auto v = ReviewVerdictFromString(j.at("verdict").get<std::string>());
  if (!v) throw DataError("unknown verdict in decision log");
  d.verdict = *v;
  d.reviewer_id = j.at("reviewer_id").get<std::string>();
  d.timestamp = j.at("timestamp").get<std::string>();
  return d;
}

nlohmann::json ReviewItem::ToJson() const {
  auto hist = nlohmann::json::array();
  for (const auto& h : history) hist.push_back(h.ToJson());
  return {{"item_id", item_id},
          {"left_id", entry.pair.left},
          {"right_id", entry.pair.right},
          {"overall_score", entry.overall_score},
          {"outcomes", entry.outcomes},
          {"left", entry.left},
          {"right", entry.right},
          {"status", ToString(status)},
          {"verdict", verdict ? nlohmann::json(ToString(*verdict)) : nlohmann::json(nullptr)},
          {"decided_by", decided_by ? nlohmann::json(*decided_by) : nlohmann::json(nullptr)},
          {"history", std::move(hist)}};
}

nlohmann::json Stats::ToJson() const {
  return {{"pending", pending}, {"decided", decided}, {"skipped", skipped}, {"loaded", loaded}};
}

// Undecided items are ordered by (tail, distance, id): tail 0 for fresh
// items, then an increasing counter for each Unsure requeue.
using OrderKey = std::tuple<std::uint64_t, double, std::string>;

struct Lease {
  std::string reviewer;
  std::chrono::system_clock::time_point expires;
};

struct ReviewQueue::State {
  std::map<std::string, ReviewItem> items;
  std::map<std::string, OrderKey> key_of;
  std::set<OrderKey> order;
  std::map<std::string, Lease> leases;
  std::vector<DecisionRecord> log;
  std::uint64_t next_seq = 1;
  std::uint64_t next_tail = 1;
};

ReviewQueue::ReviewQueue(QueueOptions options)
    : options_(std::move(options)), state_(std::make_unique<State>()) {
  options_.band.Validate();
  if (!options_.clock) options_.clock = [] { return std::chrono::system_clock::now(); };
  if (options_.log_path.empty()) throw ConfigError("review log path is empty");

  if (std::filesystem::exists(options_.log_path)) {
    std::ifstream in(options_.log_path);
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    for (const auto& l : lines) {
      ++row;
      if (l.empty()) continue;
      try {
        state_->log.push_back(DecisionRecord::FromJson(nlohmann::json::parse(l)));
      } catch (const std::exception& e) {
        // A torn final line is an unacknowledged write; anything else is corruption.
        if (row == lines.size()) break;
        throw DataError(e.what(), options_.log_path.string(), row);
      }
      state_->next_seq = std::max(state_->next_seq, state_->log.back().seq + 1);
    }
  }
  if (options_.log_path.has_parent_path()) {
    std::filesystem::create_directories(options_.log_path.parent_path());
  }
  log_fd_ = ::open(options_.log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd_ < 0) {
    throw DataError(std::string("cannot open decision log: ") + std::strerror(errno),
                    options_.log_path.string());
  }
}

ReviewQueue::~ReviewQueue() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void ReviewQueue::Load(const std::vector<QueueEntry>& entries) {
  std::unique_lock lock(mu_);
  std::set<std::string> batch;
  for (const auto& e : entries) {
    if (!batch.insert(ItemIdFor(e.pair)).second) {
      throw DataError("duplicate pair " + e.pair.str() + " in review queue input");
    }
  }
  const double mid = options_.band.midpoint();
  std::set<std::string> added;
  for (const auto& e : entries) {
    const auto id = ItemIdFor(e.pair);
    if (state_->items.contains(id)) continue;
    ReviewItem item;
    item.item_id = id;
    item.entry = e;
    state_->items.emplace(id, std::move(item));
    OrderKey key{0, std::abs(e.overall_score - mid), id};
    state_->key_of[id] = key;
    state_->order.insert(key);
    added.insert(id);
  }
  for (const auto& d : state_->log) {
    if (added.contains(d.item_id)) Apply(d);
  }
}

void ReviewQueue::Apply(const DecisionRecord& d) {
  auto& item = state_->items.at(d.item_id);
  item.history.push_back(d);
  state_->leases.erase(d.item_id);
  auto key_it = state_->key_of.find(d.item_id);
  if (key_it != state_->key_of.end()) {
    state_->order.erase(key_it->second);
    state_->key_of.erase(key_it);
  }
  if (d.verdict == ReviewVerdict::Unsure) {
    item.status = ItemStatus::Skipped;
    OrderKey key{state_->next_tail++, 0.0, d.item_id};
    state_->key_of[d.item_id] = key;
    state_->order.insert(key);
  } else {
    item.status = ItemStatus::Decided;
    item.verdict = d.verdict;
    item.decided_by = d.reviewer_id;
  }
}

void ReviewQueue::AppendToLog(const DecisionRecord& d) {
  const std::string line = d.ToJson().dump() + "\n";
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const auto n = ::write(log_fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DataError(std::string("decision log write failed: ") + std::strerror(errno),
                      options_.log_path.string());
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(log_fd_) != 0) {
    throw DataError(std::string("decision log fsync failed: ") + std::strerror(errno),
                    options_.log_path.string());
  }
}

std::string ReviewQueue::Now() const {
  const auto t = std::chrono::system_clock::to_time_t(options_.clock());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<ReviewItem> ReviewQueue::Next(const std::string& reviewer_id) {
  std::unique_lock lock(mu_);
  const auto now = options_.clock();
  for (const auto& key : state_->order) {
    const auto& id = std::get<2>(key);
    auto lease = state_->leases.find(id);
    if (lease != state_->leases.end() && lease->second.reviewer != reviewer_id &&
        lease->second.expires > now) {
      continue;
    }
    state_->leases[id] = {reviewer_id, now + options_.lease};
    return state_->items.at(id);
  }
  return std::nullopt;
}

DecisionRecord ReviewQueue::Submit(const std::string& item_id, ReviewVerdict verdict,
                                   const std::string& reviewer_id) {
  std::unique_lock lock(mu_);
  auto it = state_->items.find(item_id);
  if (it == state_->items.end()) throw NotFound("unknown item " + item_id);
  if (verdict == ReviewVerdict::Unsure && it->second.status == ItemStatus::Decided) {
    throw InvalidTransition("item " + item_id + " is already decided");
  }
  DecisionRecord d{state_->next_seq, item_id, verdict, reviewer_id, Now()};
  AppendToLog(d);
  ++state_->next_seq;
  state_->log.push_back(d);
  Apply(d);
  return d;
}

std::optional<ReviewItem> ReviewQueue::Item(const std::string& item_id) const {
  std::shared_lock lock(mu_);
  auto it = state_->items.find(item_id);
  if (it == state_->items.end()) return std::nullopt;
  return it->second;
}

Stats ReviewQueue::GetStats() const {
  std::shared_lock lock(mu_);
  Stats s;
  s.loaded = state_->items.size();
  for (const auto& [_, item] : state_->items) {
    if (item.status == ItemStatus::Decided) {
      ++s.decided;
    } else {
      ++s.pending;
      if (item.status == ItemStatus::Skipped) ++s.skipped;
    }
  }
  return s;
}

std::vector<std::string> ReviewQueue::ServingOrder() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& key : state_->order) out.push_back(std::get<2>(key));
  return out;
}

std::string ReviewQueue::ExportCsv(bool include_unsure) const {
  std::shared_lock lock(mu_);
  std::ostringstream out;
  csv::WriteRow(out, {"item_id", "left_id", "right_id", "verdict", "reviewer_id", "timestamp"});
  for (const auto& [id, item] : state_->items) {
    const bool decided = item.status == ItemStatus::Decided;
    if (!decided && !(include_unsure && item.status == ItemStatus::Skipped)) continue;
    const auto& last = item.history.back();
    csv::WriteRow(out, {id, item.entry.pair.left, item.entry.pair.right,
                        std::string(ToString(decided ? *item.verdict : ReviewVerdict::Unsure)),
                        last.reviewer_id, last.timestamp});
  }
  return out.str();
}

nlohmann::json ReviewQueue::Snapshot() const {
  std::shared_lock lock(mu_);
  nlohmann::json items = nlohmann::json::object();
  for (const auto& [id, item] : state_->items) items[id] = item.ToJson();
  auto order = nlohmann::json::array();
  for (const auto& key : state_->order) order.push_back(std::get<2>(key));
  return {{"items", std::move(items)}, {"order", std::move(order)}};
}

struct ReviewServer::Impl {
  explicit Impl(ReviewQueue& q) : queue(q) {}
  ReviewQueue& queue;
  httplib::Server server;
};

namespace {

void SendJson(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

ReviewServer::ReviewServer(ReviewQueue& queue, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(queue)) {
  auto& srv = impl_->server;
  auto& q = impl_->queue;

  srv.Get("/api/queue/next", [&q](const httplib::Request& req, httplib::Response& res) {
    const auto reviewer = req.get_param_value("reviewer");
    if (reviewer.empty()) return SendJson(res, 400, {{"error", "missing reviewer parameter"}});
    auto item = q.Next(reviewer);
    if (!item) return SendJson(res, 200, {{"empty", true}});
    auto j = item->ToJson();
    j["empty"] = false;
    SendJson(res, 200, j);
  });

  srv.Post("/api/decisions", [&q](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
      return SendJson(res, 400, {{"error", "body is not JSON"}});
    }
    if (!body.is_object() || !body.contains("item_id") || !body["item_id"].is_string() ||
        !body.contains("verdict") || !body["verdict"].is_string() ||
        !body.contains("reviewer_id") || !body["reviewer_id"].is_string()) {
      return SendJson(res, 400, {{"error", "expected string fields item_id, verdict, reviewer_id"}});
    }
    const auto verdict = ReviewVerdictFromString(body["verdict"].get<std::string>());
    if (!verdict) {
      return SendJson(res, 400, {{"error", "verdict must be match, non_match or unsure"}});
    }
    try {
      const auto d = q.Submit(body["item_id"], *verdict, body["reviewer_id"]);
      SendJson(res, 200, {{"ok", true}, {"decision", d.ToJson()}});
    } catch (const NotFound& e) {
      SendJson(res, 404, {{"error", e.what()}});
    } catch (const InvalidTransition& e) {
      SendJson(res, 409, {{"error", e.what()}});
    }
  });

  srv.Get(R"(/api/items/(.+))", [&q](const httplib::Request& req, httplib::Response& res) {
    auto item = q.Item(req.matches[1]);
    if (!item) return SendJson(res, 404, {{"error", "unknown item"}});
    SendJson(res, 200, item->ToJson());
  });

  srv.Get("/api/stats", [&q](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200, q.GetStats().ToJson());
  });

  srv.Get("/api/export", [&q](const httplib::Request& req, httplib::Response& res) {
    const auto format = req.has_param("format") ? req.get_param_value("format") : "csv";
    if (format != "csv") return SendJson(res, 400, {{"error", "only format=csv is supported"}});
    const auto flag = req.get_param_value("include_unsure");
    res.set_content(q.ExportCsv(flag == "1" || flag == "true"), "text/csv");
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      SendJson(res, 500, {{"error", e.what()}});
    }
  });

  if (static_dir) srv.set_mount_point("/", static_dir->string());
}

ReviewServer::~ReviewServer() { Stop(); }

int ReviewServer::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void ReviewServer::Serve() { impl_->server.listen_after_bind(); }

void ReviewServer::Stop() {
  if (impl_) impl_->server.stop();
}

void ReviewServer::WaitUntilReady() const { impl_->server.wait_until_ready(); }

}  // namespace reclink::review
