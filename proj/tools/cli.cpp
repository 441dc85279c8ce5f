#include "cli.hpp"

#include <signal.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reclink/blocking.hpp"
#include "reclink/config.hpp"
#include "reclink/datagen.hpp"
#include "reclink/error.hpp"
#include "reclink/evaluation.hpp"
#include "reclink/matching.hpp"
#include "reclink/parallel.hpp"
#include "reclink/review.hpp"

namespace reclink::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag values. Optionals stay empty unless given, so config values survive.
struct Flags {
  std::string config_path;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  std::optional<std::string> data_dir, out_dir, a, b, truth, pairs, decisions, queue;
  std::optional<std::string> input_format;
  bool lenient = false;

  std::optional<std::size_t> n_persons;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<double> tau;
  std::optional<double> lower, upper;
  std::optional<std::string> embed_url;
  bool em = false;

  std::optional<std::string> target;
  std::optional<std::string> llm_url, llm_model;
  std::optional<int> llm_retries;

  std::vector<std::size_t> sweep_k;
  std::vector<double> sweep_tau;
  std::optional<std::size_t> baseline;

  std::optional<std::string> host, log_path, static_dir;
  std::optional<int> port;
};

class Progress {
 public:
  Progress(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
  void operator()(const std::string& msg) const {
    if (!quiet_) err_ << "[reclink] " << msg << '\n' << std::flush;
  }

 private:
  std::ostream& err_;
  bool quiet_;
};

std::string UtcNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string NewRunId() {
  std::random_device rd;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%08x%08x", rd(), rd());
  return buf;
}

RunConfig Resolve(const Flags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : RunConfig::Load(f.config_path);
  if (f.threads) c.threads = *f.threads;
  if (f.seed) {
    c.seed = *f.seed;
    c.corpus.seed = *f.seed;
  }
  if (f.data_dir) c.paths.data_dir = *f.data_dir;
  if (f.out_dir) c.paths.out_dir = *f.out_dir;
  if (f.a) c.paths.a = *f.a;
  if (f.b) c.paths.b = *f.b;
  if (f.truth) c.paths.truth = *f.truth;
  if (f.pairs) c.paths.pairs = *f.pairs;
  if (f.decisions) c.paths.decisions = *f.decisions;
  if (f.queue) c.paths.queue = *f.queue;
  if (f.n_persons) c.corpus.n_persons = *f.n_persons;
  if (f.mode) {
    const auto m = BlockingModeFromString(*f.mode);
    if (!m) throw ConfigError("--mode must be rules, knn or hybrid, got \"" + *f.mode + "\"");
    c.blocking_mode = *m;
  }
  if (f.k) c.knn.k = *f.k;
  if (f.tau) c.knn.tau = *f.tau;
  if (f.lower) c.band.lower = c.cascade.band.lower = *f.lower;
  if (f.upper) c.band.upper = c.cascade.band.upper = *f.upper;
  if (f.embed_url) {
    c.embedding.provider = "remote";
    c.embedding.remote.url = *f.embed_url;
  }
  if (f.em) c.scoring.em = true;
  if (f.target) {
    const auto t = EscalationTargetFromString(*f.target);
    if (!t) throw ConfigError("--target must be llm, human_queue or non_match_default");
    c.cascade.escalation_target = *t;
  }
  if (f.llm_url || f.llm_model || f.llm_retries) {
    if (!c.llm) c.llm = LlmEndpointConfig{};
    if (f.llm_url) c.llm->url = *f.llm_url;
    if (f.llm_model) c.llm->model = *f.llm_model;
    if (f.llm_retries) c.llm->max_retries = *f.llm_retries;
  }
  if (!f.sweep_k.empty()) c.sweep_k = f.sweep_k;
  if (!f.sweep_tau.empty()) c.sweep_tau = f.sweep_tau;
  if (f.host) c.review.host = *f.host;
  if (f.port) c.review.port = *f.port;
  if (f.log_path) c.review.log_path = *f.log_path;
  if (f.static_dir) c.review.static_dir = *f.static_dir;
  c.Validate();
  return c;
}

fs::path OutDir(const RunConfig& c) { return c.paths.out_dir ? *c.paths.out_dir : c.paths.data_dir; }

fs::path Input(const std::optional<std::string>& explicit_path, const fs::path& dir,
               const char* default_name) {
  return explicit_path ? fs::path(*explicit_path) : dir / default_name;
}

InputFormat FormatFor(const fs::path& p, const Flags& f) {
  if (f.input_format) {
    if (*f.input_format == "csv") return InputFormat::Csv;
    if (*f.input_format == "jsonl") return InputFormat::JsonLines;
    throw ConfigError("--input-format must be csv or jsonl");
  }
  const auto ext = p.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" ? InputFormat::JsonLines : InputFormat::Csv;
}

struct Inputs {
  Dataset a, b;
};

Inputs LoadAB(const RunConfig& c, const Flags& f, const Progress& log) {
  const fs::path pa = Input(c.paths.a, c.paths.data_dir, "A.csv");
  const fs::path pb = Input(c.paths.b, c.paths.data_dir, "B.csv");
  ParseOptions opt{f.lenient};
  Inputs in{ParseRecords(pa, Source::A, FormatFor(pa, f), opt),
            ParseRecords(pb, Source::B, FormatFor(pb, f), opt)};
  log("loaded " + std::to_string(in.a.size()) + " A records from " + pa.string() + ", " +
      std::to_string(in.b.size()) + " B records from " + pb.string());
  return in;
}

std::vector<PairId> LoadTruth(const RunConfig& c) {
  const fs::path p = Input(c.paths.truth, c.paths.data_dir, "truth.csv");
  std::ifstream in(p);
  if (!in) throw DataError("cannot open truth file", p.string(), 0);
  return ReadTruthCsv(in, p.string());
}

CandidatePairSet LoadPairs(const RunConfig& c, const Inputs& in) {
  const fs::path p = Input(c.paths.pairs, OutDir(c), "pairs.csv");
  std::ifstream s(p);
  if (!s) throw DataError("cannot open pair file", p.string(), 0);
  return ReadPairsCsv(s, in.a, in.b, p.string());
}

template <typename Fn>
void WriteFile(const fs::path& p, Fn&& fn) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot open output file", p.string(), 0);
  fn(out);
  out.flush();
  if (!out) throw DataError("write failed", p.string(), 0);
}

// Resolved-config echo and run summary, written beside a command's outputs.
class RunRecord {
 public:
  RunRecord(std::string command, const RunConfig& config)
      : command_(std::move(command)), config_(config), started_(UtcNow()), run_id_(NewRunId()) {}

  void Output(const fs::path& p) { outputs_.push_back(p.string()); }
  json& counts() { return counts_; }

  void Finish() {
    const fs::path dir = OutDir(config_);
    fs::create_directories(dir);
    WriteFile(dir / (command_ + ".config.json"),
              [&](std::ostream& o) { o << config_.ToJson().dump(2) << '\n'; });
    json summary = {{"command", command_},
                    {"run_id", run_id_},
                    {"started_at", started_},
                    {"finished_at", UtcNow()},
                    {"version", RECLINK_VERSION},
                    {"outputs", outputs_},
                    {"counts", counts_}};
    WriteFile(dir / (command_ + ".summary.json"),
              [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
  }

 private:
  std::string command_;
  const RunConfig& config_;
  std::string started_;
  std::string run_id_;
  std::vector<std::string> outputs_;
  json counts_ = json::object();
};

std::size_t Threads(const RunConfig& c) { return c.threads == 0 ? DefaultParallelism() : c.threads; }

int CmdGenerate(const RunConfig& c, const Progress& log) {
  RunRecord rec("generate", c);
  const fs::path dir = OutDir(c);
  log("generating " + std::to_string(c.corpus.n_persons) + " persons, seed " + std::to_string(c.seed));
  const Corpus corpus = GenerateCorpus(c.corpus);
  WriteCorpus(corpus, dir);
  for (const char* name : {"A.csv", "B.csv", "truth.csv"}) rec.Output(dir / name);
  rec.counts() = {{"a", corpus.a.size()}, {"b", corpus.b.size()}, {"truth", corpus.truth.size()}};
  log("wrote " + std::to_string(corpus.a.size()) + " A, " + std::to_string(corpus.b.size()) +
      " B records and " + std::to_string(corpus.truth.size()) + " truth pairs to " + dir.string());
  rec.Finish();
  return kExitOk;
}

int CmdBlock(const RunConfig& c, const Flags& f, const Progress& log) {
  RunRecord rec("block", c);
  const Inputs in = LoadAB(c, f, log);
  CandidatePairSet out;
  switch (c.blocking_mode) {
    case BlockingMode::Rules:
      out = BlockByRules(in.a, in.b, c.rules);
      log("rule blocking: " + std::to_string(out.size()) + " candidate pairs");
      break;
    case BlockingMode::Knn: {
      const auto provider = c.embedding.MakeProvider();
      log("knn blocking with " + provider->Describe() + ", k=" + std::to_string(c.knn.k) +
          ", tau=" + std::to_string(c.knn.tau));
      out = BlockByKnn(in.a, in.b, *provider, c.knn, Threads(c), [&](const std::string& w) { log("warning: " + w); });
      log("knn blocking: " + std::to_string(out.size()) + " candidate pairs");
      break;
    }
    case BlockingMode::Hybrid: {
      const HybridResult h = HybridBlock(in.a, in.b, c.rules, c.comparators, c.band);
      std::vector<CandidatePair> kept(h.auto_matches.begin(), h.auto_matches.end());
      kept.insert(kept.end(), h.escalated.begin(), h.escalated.end());
      out = CandidatePairSet(std::move(kept));
      rec.counts()["rule_candidates"] = h.rule_candidates.size();
      rec.counts()["auto_matches"] = h.auto_matches.size();
      rec.counts()["auto_nonmatches"] = h.auto_nonmatches_count;
      rec.counts()["escalated"] = h.escalated.size();
      log("hybrid blocking: " + std::to_string(h.rule_candidates.size()) + " rule candidates, " +
          std::to_string(h.auto_matches.size()) + " auto matches, " +
          std::to_string(h.escalated.size()) + " escalated, " +
          std::to_string(h.auto_nonmatches_count) + " dropped");
      break;
    }
  }
  rec.counts()["pairs"] = out.size();
  const fs::path p = Input(c.paths.pairs, OutDir(c), "pairs.csv");
  WriteFile(p, [&](std::ostream& o) { WritePairsCsv(o, in.a, in.b, out); });
  rec.Output(p);
  rec.Finish();
  return kExitOk;
}

int CmdScore(const RunConfig& c, const Flags& f, const Progress& log) {
  RunRecord rec("score", c);
  const Inputs in = LoadAB(c, f, log);
  const CandidatePairSet pairs = LoadPairs(c, in);
  ComparatorConfig config = c.comparators;

  auto score_all = [&](const ComparatorConfig& cfg) {
    std::vector<ScoredPair> scored;
    scored.reserve(pairs.size());
    for (const auto& p : pairs) scored.push_back(ScorePair(in.a, in.b, p.index, cfg));
    return scored;
  };
  std::vector<ScoredPair> scored = score_all(config);

  if (c.scoring.em) {
    std::vector<AgreementVector> vectors;
    vectors.reserve(scored.size());
    for (const auto& s : scored) vectors.push_back(s.vector);
    const EmResult em = EstimateParamsEm(vectors, EmInit{}, c.scoring.em_tol, c.scoring.em_max_iter);
    json em_json = {{"m", em.m},
                    {"u", em.u},
                    {"prior", em.prior},
                    {"iterations", em.iterations},
                    {"log_likelihood", em.log_likelihood},
                    {"converged", em.converged},
                    {"degenerate", em.degenerate}};
    const fs::path ep = OutDir(c) / "em.json";
    WriteFile(ep, [&](std::ostream& o) { o << em_json.dump(2) << '\n'; });
    rec.Output(ep);
    log("EM: " + std::to_string(em.iterations) + " iterations, prior " + std::to_string(em.prior));
    try {
      config = config.WithParameters(em.m, em.u);
      scored = score_all(config);
    } catch (const ConfigError& e) {
      log(std::string("warning: EM estimates unusable, keeping configured m/u: ") + e.what());
    }
  }

  const fs::path p = OutDir(c) / "scores.csv";
  WriteFile(p, [&](std::ostream& o) { WriteScoresCsv(o, in.a, in.b, scored, config); });
  rec.Output(p);
  if (c.paths.truth || fs::exists(c.paths.data_dir / fs::path("truth.csv"))) {
    const auto truth = LoadTruth(c);
    const fs::path dp = OutDir(c) / "score_distribution.csv";
    WriteFile(dp, [&](std::ostream& o) { WriteScoreDistributionCsv(o, in.a, in.b, scored, truth); });
    rec.Output(dp);
  }
  rec.counts()["scored"] = scored.size();
  log("scored " + std::to_string(scored.size()) + " pairs");
  rec.Finish();
  return kExitOk;
}

int CmdMatch(const RunConfig& c, const Flags& f, const Progress& log) {
  RunRecord rec("match", c);
  const Inputs in = LoadAB(c, f, log);
  const CandidatePairSet pairs = LoadPairs(c, in);
  log("cascade over " + std::to_string(pairs.size()) + " pairs, escalation to " +
      std::string(ToString(c.cascade.escalation_target)));
  const CascadeResult r = MatchCascade(in.a, in.b, pairs, c.cascade, c.comparators, c.llm);

  const fs::path dp = Input(c.paths.decisions, OutDir(c), "decisions.csv");
  WriteFile(dp, [&](std::ostream& o) { WriteDecisionsCsv(o, r.decisions); });
  const fs::path qp = Input(c.paths.queue, OutDir(c), "queue.jsonl");
  WriteFile(qp, [&](std::ostream& o) { WriteQueueJsonl(o, in.a, in.b, r.queued, c.comparators); });
  rec.Output(dp);
  rec.Output(qp);
  rec.counts() = {{"pairs", pairs.size()},
                  {"decisions", r.decisions.size()},
                  {"queued", r.queued.size()},
                  {"llm_calls", r.llm_calls}};
  log(std::to_string(r.decisions.size()) + " decisions, " + std::to_string(r.queued.size()) +
      " queued for review, " + std::to_string(r.llm_calls) + " LLM calls");
  rec.Finish();
  return kExitOk;
}

int CmdSweep(const RunConfig& c, const Flags& f, const Progress& log) {
  RunRecord rec("sweep", c);
  const Inputs in = LoadAB(c, f, log);
  const auto truth = LoadTruth(c);
  const auto provider = c.embedding.MakeProvider();
  log("sweep over " + std::to_string(c.sweep_k.size()) + " k x " + std::to_string(c.sweep_tau.size()) +
      " tau with " + provider->Describe());
  const SweepGrid grid = RunSweep(in.a, in.b, *provider, c.sweep_k, c.sweep_tau, truth, Threads(c));
  const fs::path gp = OutDir(c) / "grid.csv";
  const fs::path pp = OutDir(c) / "grid_plot.csv";
  WriteFile(gp, [&](std::ostream& o) { WriteSweepCsv(o, grid); });
  WriteFile(pp, [&](std::ostream& o) { WriteSweepPlotData(o, grid); });
  rec.Output(gp);
  rec.Output(pp);
  rec.counts()["rows"] = grid.rows.size();
  log("wrote " + std::to_string(grid.rows.size()) + " grid rows to " + gp.string());
  rec.Finish();
  return kExitOk;
}

int CmdEval(const RunConfig& c, const Flags& f, std::ostream& out, const Progress& log) {
  RunRecord rec("eval", c);
  const Inputs in = LoadAB(c, f, log);
  const auto truth = LoadTruth(c);
  json report = json::object();

  const fs::path pp = Input(c.paths.pairs, OutDir(c), "pairs.csv");
  if (c.paths.pairs || fs::exists(pp)) {
    const CandidatePairSet pairs = LoadPairs(c, in);
    const auto ids = PairIds(in.a, in.b, pairs);
    const BlockingReport br = EvalBlocking(ids, truth, in.a.size(), in.b.size(), f.baseline);
    report["blocking"] = br.ToJson();
    const fs::path p = OutDir(c) / "blocking_report.json";
    WriteFile(p, [&](std::ostream& o) { o << br.ToJson().dump(2) << '\n'; });
    rec.Output(p);
    log("blocking: " + std::to_string(br.candidate_count) + " candidates, " +
        std::to_string(br.true_matches_missed) + " true matches missed");
  }

  const fs::path dp = Input(c.paths.decisions, OutDir(c), "decisions.csv");
  if (c.paths.decisions || fs::exists(dp)) {
    std::ifstream s(dp);
    if (!s) throw DataError("cannot open decisions file", dp.string(), 0);
    const auto decisions = ReadDecisionsCsv(s, dp.string());
    const MatchingReport mr = EvalMatching(decisions, truth);
    report["matching"] = mr.ToJson();
    const fs::path p = OutDir(c) / "matching_report.json";
    WriteFile(p, [&](std::ostream& o) { o << mr.ToJson().dump(2) << '\n'; });
    rec.Output(p);
    log("matching: FP " + std::to_string(mr.fp) + ", FN " + std::to_string(mr.fn) + ", F1 " +
        std::to_string(mr.f1));
  }
  if (report.empty()) throw ConfigError("eval needs a pair file or a decisions file");
  out << report.dump(2) << '\n';
  rec.Finish();
  return kExitOk;
}

int CmdReviewServe(const RunConfig& c, std::ostream& out, const Progress& log) {
  const fs::path qp = Input(c.paths.queue, OutDir(c), "queue.jsonl");
  const auto entries = review::ReadQueueJsonl(qp);
  review::QueueOptions opt;
  opt.log_path = c.review.log_path;
  opt.band = c.cascade.band;
  opt.lease = std::chrono::seconds(c.review.lease_seconds);
  review::ReviewQueue queue(std::move(opt));
  queue.Load(entries);
  const auto stats = queue.GetStats();
  log("loaded " + std::to_string(stats.loaded) + " review items (" + std::to_string(stats.decided) +
      " already decided) from " + qp.string());

  std::optional<fs::path> static_dir;
  if (c.review.static_dir) static_dir = *c.review.static_dir;
  review::ReviewServer server(queue, static_dir);
  const int port = server.Bind(c.review.host, c.review.port);
  if (port < 0) throw ConfigError("cannot bind " + c.review.host + ":" + std::to_string(c.review.port));

  // SIGINT/SIGTERM are taken synchronously by a watcher thread, which stops the server.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::jthread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.Stop();
  });

  out << "http://" << c.review.host << ':' << port << '\n' << std::flush;
  log("serving review queue on " + c.review.host + ":" + std::to_string(port) + ", log " +
      c.review.log_path);
  server.Serve();
  // Wake the watcher if Serve returned for another reason.
  pthread_kill(watcher.native_handle(), SIGTERM);
  return kExitOk;
}

template <typename T>
void Opt(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Record linkage pipeline: generate, block, score, match, sweep, eval, review-serve",
               "reclink"};
  app.set_version_flag("--version", std::string("reclink ") + RECLINK_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  Opt(&app, "--threads", f.threads, "Worker threads (0 = one per processor)");
  Opt(&app, "--seed", f.seed, "Random seed");
  app.add_flag("--quiet,-q", f.quiet, "No progress output");
  Opt(&app, "--data", f.data_dir, "Directory holding A.csv, B.csv, truth.csv");
  Opt(&app, "--out", f.out_dir, "Output directory (default: the data directory)");

  auto inputs = [&](CLI::App* sub) {
    Opt(sub, "--a", f.a, "Source A records (.csv or .jsonl)");
    Opt(sub, "--b", f.b, "Source B records (.csv or .jsonl)");
    Opt(sub, "--input-format", f.input_format, "csv or jsonl (default: by extension)");
    sub->add_flag("--lenient", f.lenient, "Coerce malformed dates and SSNs to missing");
  };
  auto band = [&](CLI::App* sub) {
    Opt(sub, "--lower", f.lower, "Lower score threshold");
    Opt(sub, "--upper", f.upper, "Upper score threshold");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus (A.csv, B.csv, truth.csv)");
  Opt(gen, "--n-persons", f.n_persons, "Latent persons to sample");

  auto* block = app.add_subcommand("block", "Generate candidate pairs");
  inputs(block);
  Opt(block, "--mode", f.mode, "rules, knn or hybrid");
  Opt(block, "--k", f.k, "Neighbours per A record");
  Opt(block, "--tau", f.tau, "Cosine threshold (strict)");
  band(block);
  Opt(block, "--embed-url", f.embed_url, "Remote embedding endpoint");
  Opt(block, "--pairs", f.pairs, "Output pair CSV (default: <out>/pairs.csv)");

  auto* score = app.add_subcommand("score", "Fellegi-Sunter scores for a pair file");
  inputs(score);
  Opt(score, "--pairs", f.pairs, "Pair CSV");
  Opt(score, "--truth", f.truth, "Truth CSV, adds score_distribution.csv");
  score->add_flag("--em", f.em, "Re-estimate m/u with EM first");

  auto* match = app.add_subcommand("match", "Run the matcher cascade");
  inputs(match);
  Opt(match, "--pairs", f.pairs, "Pair CSV");
  band(match);
  Opt(match, "--target", f.target, "llm, human_queue or non_match_default");
  Opt(match, "--llm-url", f.llm_url, "Chat-completions endpoint");
  Opt(match, "--llm-model", f.llm_model, "Model name sent to the endpoint");
  Opt(match, "--llm-retries", f.llm_retries, "Retries for unparseable replies");
  Opt(match, "--decisions", f.decisions, "Output decisions CSV");
  Opt(match, "--queue", f.queue, "Output review queue (JSON Lines)");

  auto* sweep = app.add_subcommand("sweep", "KNN blocking over a (k, tau) lattice");
  inputs(sweep);
  Opt(sweep, "--truth", f.truth, "Truth CSV");
  sweep->add_option("--k", f.sweep_k, "k values")->delimiter(',');
  sweep->add_option("--tau", f.sweep_tau, "tau values")->delimiter(',');
  Opt(sweep, "--embed-url", f.embed_url, "Remote embedding endpoint");

  auto* eval = app.add_subcommand("eval", "Blocking and matching reports against truth");
  inputs(eval);
  Opt(eval, "--truth", f.truth, "Truth CSV");
  Opt(eval, "--pairs", f.pairs, "Pair CSV");
  Opt(eval, "--decisions", f.decisions, "Decisions CSV");
  Opt(eval, "--baseline", f.baseline, "Reference pair count for the reduction ratio");

  auto* serve = app.add_subcommand("review-serve", "Serve the clerical review queue over HTTP");
  Opt(serve, "--queue", f.queue, "Queue file from `match`");
  Opt(serve, "--host", f.host, "Bind address");
  Opt(serve, "--port", f.port, "Port (0 picks one)");
  Opt(serve, "--log", f.log_path, "Decision log (JSON Lines, append-only)");
  Opt(serve, "--static-dir", f.static_dir, "Review UI bundle to serve");
  band(serve);

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return kExitOk;
    err << "Run with --help for usage.\n";
    return kExitUsage;
  }

  const Progress log(err, f.quiet);
  try {
    const RunConfig c = Resolve(f);
    if (*gen) return CmdGenerate(c, log);
    if (*block) return CmdBlock(c, f, log);
    if (*score) return CmdScore(c, f, log);
    if (*match) return CmdMatch(c, f, log);
    if (*sweep) return CmdSweep(c, f, log);
    if (*eval) return CmdEval(c, f, out, log);
    if (*serve) return CmdReviewServe(c, out, log);
    return kExitUsage;
  } catch (const TransportError& e) {
    err << "reclink: external service error: " << e.what() << '\n';
    return kExitExternal;
  } catch (const UnparseableResponse& e) {
    err << "reclink: external service error: " << e.what() << '\n';
    return kExitExternal;
  } catch (const ConfigError& e) {
    err << "reclink: invalid configuration: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    err << "reclink: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "reclink: error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace reclink::cli
