#include "reclink/config.hpp"

#include <fstream>
#include <set>

#include "reclink/error.hpp"
#include "reclink/evaluation.hpp"

namespace reclink {

std::string_view ToString(BlockingMode m) {
  switch (m) {
    case BlockingMode::Rules: return "rules";
    case BlockingMode::Knn: return "knn";
    case BlockingMode::Hybrid: return "hybrid";
  }
  return {};
}

std::optional<BlockingMode> BlockingModeFromString(std::string_view s) {
  for (auto m : {BlockingMode::Rules, BlockingMode::Knn, BlockingMode::Hybrid}) {
    if (ToString(m) == s) return m;
  }
  return std::nullopt;
}

std::unique_ptr<EmbeddingProvider> EmbeddingSettings::MakeProvider() const {
  if (provider == "ngram_hash") return std::make_unique<NgramHashProvider>(dim, n);
  if (provider == "remote") return std::make_unique<RemoteProvider>(remote);
  throw ConfigError("unknown embedding provider \"" + provider + "\"");
}

namespace {

using nlohmann::json;

// Walks an object, rejecting keys the caller does not consume.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError("unknown config key " + path_ + "." + key);
    }
  }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = get(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception& e) {
        throw ConfigError(path_ + "." + key + ": " + e.what());
      }
    }
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

ClassificationThresholds ReadBand(const json& j, const std::string& path) {
  ClassificationThresholds t;
  Section s(j, path);
  s.read("lower", t.lower);
  s.read("upper", t.upper);
  return t;
}

json OptionalJson(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

void ReadOptional(Section& s, const std::string& key, std::optional<std::string>& out) {
  if (const json* v = s.get(key)) {
    if (v->is_string()) out = v->get<std::string>();
    else if (v->is_null()) out.reset();
    else throw ConfigError(s.path(key) + " must be a string or null");
  }
}

json BandJson(const ClassificationThresholds& t) { return {{"lower", t.lower}, {"upper", t.upper}}; }

}  // namespace

void RunConfig::Validate() const {
  corpus.Validate();
  if (rules.empty()) throw ConfigError("blocking.rules is empty");
  knn.Validate();
  band.Validate();
  cascade.band.Validate();
  if (embedding.provider != "ngram_hash" && embedding.provider != "remote") {
    throw ConfigError("embedding.provider must be ngram_hash or remote");
  }
  if (embedding.provider == "ngram_hash") NgramHashProvider(embedding.dim, embedding.n);
  if (embedding.provider == "remote") RemoteProvider{embedding.remote};
  if (cascade.escalation_target == EscalationTarget::Llm && !llm) {
    throw ConfigError("matching.escalation_target is llm but no llm section is configured");
  }
  if (llm) llm->Validate();
  if (sweep_k.empty() || sweep_tau.empty()) throw ConfigError("sweep lattices must be non-empty");
  for (auto k : sweep_k) KnnParams{k, 0.5}.Validate();
  for (auto t : sweep_tau) KnnParams{1, t}.Validate();
  if (review.port < 0 || review.port > 65535) throw ConfigError("review.port out of range");
  if (scoring.em_max_iter < 1) throw ConfigError("scoring.em_max_iter must be >= 1");
  if (!(scoring.em_tol >= 0)) throw ConfigError("scoring.em_tol must be >= 0");
  if (review.lease_seconds < 1) throw ConfigError("review.lease_seconds must be >= 1");
}

nlohmann::json RunConfig::ToJson() const {
  json rules_json = json::array();
  for (auto r : rules) rules_json.push_back(ToString(r));
  auto corpus_json = corpus.ToJson();
  corpus_json.erase("seed");

  json j = {
      {"seed", seed},
      {"threads", threads},
      {"paths",
       {{"data_dir", paths.data_dir},
        {"out_dir", OptionalJson(paths.out_dir)},
        {"a", OptionalJson(paths.a)},
        {"b", OptionalJson(paths.b)},
        {"truth", OptionalJson(paths.truth)},
        {"pairs", OptionalJson(paths.pairs)},
        {"decisions", OptionalJson(paths.decisions)},
        {"queue", OptionalJson(paths.queue)}}},
      {"corpus", corpus_json},
      {"comparators", comparators.ToJson()},
      {"scoring",
       {{"em", scoring.em}, {"em_tol", scoring.em_tol}, {"em_max_iter", scoring.em_max_iter}}},
      {"blocking",
       {{"mode", ToString(blocking_mode)},
        {"rules", rules_json},
        {"k", knn.k},
        {"tau", knn.tau},
        {"band", BandJson(band)}}},
      {"embedding",
       {{"provider", embedding.provider},
        {"dim", embedding.dim},
        {"n", embedding.n},
        {"url", embedding.remote.url},
        {"batch_size", embedding.remote.batch_size},
        {"timeout_ms", embedding.remote.timeout_ms},
        {"parallelism", embedding.remote.parallelism}}},
      {"matching",
       {{"band", BandJson(cascade.band)},
        {"escalation_target", ToString(cascade.escalation_target)}}},
      {"sweep", {{"k", sweep_k}, {"tau", sweep_tau}}},
      {"review",
       {{"host", review.host},
        {"port", review.port},
        {"log_path", review.log_path},
        {"static_dir", review.static_dir ? json(*review.static_dir) : json(nullptr)},
        {"lease_seconds", review.lease_seconds}}},
  };
  if (llm) {
    j["llm"] = {{"url", llm->url},
                {"model", llm->model},
                {"temperature", llm->temperature},
                {"system_prompt", llm->system_prompt ? json(*llm->system_prompt) : json(nullptr)},
                {"max_tokens", llm->max_tokens},
                {"max_retries", llm->max_retries},
                {"timeout_ms", llm->timeout_ms},
                {"parallelism", llm->parallelism}};
  }
  return j;
}

RunConfig RunConfig::FromJson(const nlohmann::json& j) {
  RunConfig c;
  {
    Section root(j, "config");
    root.read("seed", c.seed);
    root.read("threads", c.threads);
    if (const json* v = root.get("paths")) {
      Section s(*v, "paths");
      s.read("data_dir", c.paths.data_dir);
      ReadOptional(s, "out_dir", c.paths.out_dir);
      ReadOptional(s, "a", c.paths.a);
      ReadOptional(s, "b", c.paths.b);
      ReadOptional(s, "truth", c.paths.truth);
      ReadOptional(s, "pairs", c.paths.pairs);
      ReadOptional(s, "decisions", c.paths.decisions);
      ReadOptional(s, "queue", c.paths.queue);
    }
    if (const json* v = root.get("scoring")) {
      Section s(*v, "scoring");
      s.read("em", c.scoring.em);
      s.read("em_tol", c.scoring.em_tol);
      s.read("em_max_iter", c.scoring.em_max_iter);
    }
    if (const json* v = root.get("corpus")) c.corpus = CorpusSpec::FromJson(*v);
    c.corpus.seed = c.seed;
    if (const json* v = root.get("comparators")) c.comparators = ComparatorConfig::FromJson(*v);

    if (const json* v = root.get("blocking")) {
      Section s(*v, "blocking");
      std::string mode(ToString(c.blocking_mode));
      s.read("mode", mode);
      const auto m = BlockingModeFromString(mode);
      if (!m) throw ConfigError("blocking.mode must be rules, knn or hybrid, got \"" + mode + "\"");
      c.blocking_mode = *m;
      if (const json* r = s.get("rules")) {
        if (!r->is_array()) throw ConfigError("blocking.rules must be an array");
        c.rules.clear();
        for (const auto& name : *r) {
          const auto rule = name.is_string() ? BlockKeyRuleFromString(name.get<std::string>())
                                             : std::nullopt;
          if (!rule) throw ConfigError("unknown blocking rule " + name.dump());
          c.rules.push_back(*rule);
        }
      }
      s.read("k", c.knn.k);
      s.read("tau", c.knn.tau);
      if (const json* b = s.get("band")) c.band = ReadBand(*b, "blocking.band");
    }

    if (const json* v = root.get("embedding")) {
      Section s(*v, "embedding");
      s.read("provider", c.embedding.provider);
      s.read("dim", c.embedding.dim);
      s.read("n", c.embedding.n);
      s.read("url", c.embedding.remote.url);
      s.read("batch_size", c.embedding.remote.batch_size);
      s.read("timeout_ms", c.embedding.remote.timeout_ms);
      s.read("parallelism", c.embedding.remote.parallelism);
    }

    if (const json* v = root.get("matching")) {
      Section s(*v, "matching");
      if (const json* b = s.get("band")) c.cascade.band = ReadBand(*b, "matching.band");
      std::string target(ToString(c.cascade.escalation_target));
      s.read("escalation_target", target);
      const auto t = EscalationTargetFromString(target);
      if (!t) throw ConfigError("matching.escalation_target must be llm, human_queue or non_match_default");
      c.cascade.escalation_target = *t;
    }

    if (const json* v = root.get("llm"); v && !v->is_null()) {
      Section s(*v, "llm");
      LlmEndpointConfig l;
      s.read("url", l.url);
      s.read("model", l.model);
      s.read("temperature", l.temperature);
      if (const json* sp = s.get("system_prompt")) {
        if (sp->is_null()) {
          l.system_prompt.reset();
        } else if (sp->is_string()) {
          l.system_prompt = sp->get<std::string>();
        } else {
          throw ConfigError("llm.system_prompt must be a string or null");
        }
      }
      s.read("max_tokens", l.max_tokens);
      s.read("max_retries", l.max_retries);
      s.read("timeout_ms", l.timeout_ms);
      s.read("parallelism", l.parallelism);
      c.llm = l;
    }

    if (const json* v = root.get("sweep")) {
      Section s(*v, "sweep");
      s.read("k", c.sweep_k);
      s.read("tau", c.sweep_tau);
    }

    if (const json* v = root.get("review")) {
      Section s(*v, "review");
      s.read("host", c.review.host);
      s.read("port", c.review.port);
      s.read("log_path", c.review.log_path);
      if (const json* d = s.get("static_dir")) {
        if (d->is_string()) c.review.static_dir = d->get<std::string>();
        else if (!d->is_null()) throw ConfigError("review.static_dir must be a string or null");
      }
      s.read("lease_seconds", c.review.lease_seconds);
    }
  }
  c.Validate();
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return FromJson(j);
}

}  // namespace reclink
