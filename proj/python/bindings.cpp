#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "reclink/blocking.hpp"
#include "reclink/datagen.hpp"
#include "reclink/error.hpp"
#include "reclink/evaluation.hpp"
#include "reclink/fellegi_sunter.hpp"
#include "reclink/matching.hpp"
#include "reclink/text_sim.hpp"

namespace py = pybind11;
using namespace reclink;

namespace {

using PairTuple = std::pair<std::string, std::string>;

Source SourceOf(const std::string& s) {
  if (s == "A" || s == "a") return Source::A;
  if (s == "B" || s == "b") return Source::B;
  throw ConfigError("source must be \"A\" or \"B\"");
}

// Records cross the boundary as JSON text; the Python side handles dicts.
Dataset DatasetFromJsonLines(const std::string& jsonl, const std::string& source, bool lenient) {
  std::istringstream in(jsonl);
  return ParseRecords(in, SourceOf(source), InputFormat::JsonLines, {lenient}, "<python>");
}

std::string RecordsJson(const Dataset& d) {
  auto out = nlohmann::json::array();
  for (const auto& r : d.records()) {
    nlohmann::json j = {{"record_id", r.record_id}};
    for (Field f : kAllFields) {
      const auto v = r.Text(f);
      j[std::string(ColumnName(f))] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    }
    out.push_back(std::move(j));
  }
  return out.dump();
}

PairIndex IndexOf(const Dataset& a, const Dataset& b, const PairTuple& p) {
  const auto l = a.IndexOf(p.first);
  const auto r = b.IndexOf(p.second);
  if (!l || !r) throw DataError("unknown record id in pair " + p.first + "|" + p.second);
  return {static_cast<std::uint32_t>(*l), static_cast<std::uint32_t>(*r)};
}

std::string PairsJson(const Dataset& a, const Dataset& b, const CandidatePairSet& pairs) {
  auto out = nlohmann::json::array();
  for (const auto& p : pairs) {
    out.push_back({{"left_id", a[p.index.left].record_id},
                   {"right_id", b[p.index.right].record_id},
                   {"provenance", ProvenanceString(p.provenance)},
                   {"score", p.score ? nlohmann::json(*p.score) : nlohmann::json(nullptr)}});
  }
  return out.dump();
}

std::vector<PairId> ToPairIds(const std::vector<PairTuple>& v) {
  std::vector<PairId> out;
  out.reserve(v.size());
  for (const auto& [l, r] : v) out.push_back({l, r});
  return out;
}

AgreementVector ParseVector(const std::vector<std::string>& v) {
  AgreementVector out;
  for (const auto& s : v) {
    if (s == "agree") out.push_back(Outcome::Agree);
    else if (s == "disagree") out.push_back(Outcome::Disagree);
    else if (s == "missing") out.push_back(Outcome::Missing);
    else throw ConfigError("outcome must be agree, disagree or missing, got \"" + s + "\"");
  }
  return out;
}

ComparatorConfig ComparatorsFrom(const std::optional<std::string>& json) {
  return json ? ComparatorConfig::FromJson(nlohmann::json::parse(*json)) : ComparatorConfig::Default();
}

}  // namespace

PYBIND11_MODULE(_reclink, m) {
  m.doc() = "Record linkage core: string metrics, Fellegi-Sunter scoring, blocking, matching.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_ConnectionError);
  py::register_exception<UnparseableResponse>(m, "UnparseableResponse", PyExc_RuntimeError);

  m.def("jaro", &Jaro, py::arg("a"), py::arg("b"));
  m.def("jaro_winkler", &JaroWinkler, py::arg("a"), py::arg("b"));
  m.def("damerau_levenshtein", &DamerauLevenshtein, py::arg("a"), py::arg("b"));
  m.def("levenshtein", &Levenshtein, py::arg("a"), py::arg("b"));
  m.def("soundex", &Soundex, py::arg("s"));
  m.def("embed_ngram", [](const std::string& text, std::size_t dim, std::size_t n) {
    return EmbedNgramHash(text, dim, n).values;
  }, py::arg("text"), py::arg("dim") = 256, py::arg("n") = 3);

  py::class_<Dataset>(m, "Dataset")
      .def_static("from_jsonl", &DatasetFromJsonLines, py::arg("jsonl"), py::arg("source"),
                  py::arg("lenient") = false)
      .def_static("read", [](const std::filesystem::path& path, const std::string& source, bool lenient) {
        const auto ext = path.extension().string();
        const auto fmt = ext == ".jsonl" || ext == ".ndjson" ? InputFormat::JsonLines : InputFormat::Csv;
        return ParseRecords(path, SourceOf(source), fmt, {lenient});
      }, py::arg("path"), py::arg("source"), py::arg("lenient") = false)
      .def("__len__", &Dataset::size)
      .def_property_readonly("source", [](const Dataset& d) { return std::string(ToString(d.source())); })
      .def("records_json", &RecordsJson);

  m.def("generate_corpus", [](std::size_t n_persons, std::uint64_t seed, std::optional<std::string> spec_json) {
    CorpusSpec spec = spec_json ? CorpusSpec::FromJson(nlohmann::json::parse(*spec_json)) : CorpusSpec{};
    spec.n_persons = n_persons;
    spec.seed = seed;
    auto c = GenerateCorpus(spec);
    std::vector<PairTuple> truth;
    for (const auto& t : c.truth) truth.emplace_back(t.left, t.right);
    return py::make_tuple(std::move(c.a), std::move(c.b), truth);
  }, py::arg("n_persons") = 5000, py::arg("seed") = CorpusSpec{}.seed, py::arg("spec_json") = py::none());

  m.def("compare_and_score", [](const Dataset& a, const Dataset& b, const PairTuple& pair,
                                std::optional<std::string> comparators, double lower, double upper) {
    const auto cfg = ComparatorsFrom(comparators);
    const auto s = ScorePair(a, b, IndexOf(a, b, pair), cfg);
    auto outcomes = nlohmann::json::array();
    for (auto o : s.vector) outcomes.push_back(ToString(o));
    const ClassificationThresholds t{lower, upper};
    t.Validate();
    return nlohmann::json{{"outcomes", outcomes},
                          {"total_weight", s.score.total_weight},
                          {"overall_score", s.score.overall_score},
                          {"classification", ToString(Classify(s, t))}}
        .dump();
  }, py::arg("a"), py::arg("b"), py::arg("pair"), py::arg("comparators_json") = py::none(),
     py::arg("lower") = 0.65, py::arg("upper") = 1.0);

  m.def("score_vector", [](const std::vector<std::string>& v, std::optional<std::string> comparators) {
    return ScoreVector(ParseVector(v), ComparatorsFrom(comparators)).overall_score;
  }, py::arg("outcomes"), py::arg("comparators_json") = py::none());

  m.def("estimate_em", [](const std::vector<std::vector<std::string>>& vectors, double m0, double u0,
                          double prior, double tol, int max_iter) {
    std::vector<AgreementVector> vs;
    for (const auto& v : vectors) vs.push_back(ParseVector(v));
    const auto r = EstimateParamsEm(vs, {m0, u0, prior}, tol, max_iter);
    return nlohmann::json{{"m", r.m}, {"u", r.u}, {"prior", r.prior}, {"iterations", r.iterations},
                          {"log_likelihood", r.log_likelihood},
                          {"log_likelihood_trace", r.log_likelihood_trace},
                          {"converged", r.converged}, {"degenerate", r.degenerate}}
        .dump();
  }, py::arg("vectors"), py::arg("m") = 0.9, py::arg("u") = 0.1, py::arg("prior") = 0.1,
     py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

  m.def("block_rules", [](const Dataset& a, const Dataset& b) {
    const auto rules = DefaultBlockRules();
    return PairsJson(a, b, BlockByRules(a, b, rules));
  }, py::arg("a"), py::arg("b"));

  m.def("block_knn", [](const Dataset& a, const Dataset& b, std::size_t k, double tau, std::size_t dim,
                        std::size_t n, std::size_t threads) {
    py::gil_scoped_release release;
    return PairsJson(a, b, BlockByKnn(a, b, NgramHashProvider(dim, n), {k, tau}, threads));
  }, py::arg("a"), py::arg("b"), py::arg("k") = 10, py::arg("tau") = 0.75, py::arg("dim") = 256,
     py::arg("n") = 3, py::arg("threads") = 0);

  m.def("hybrid_block", [](const Dataset& a, const Dataset& b, double lower, double upper,
                           std::optional<std::string> comparators) {
    const auto rules = DefaultBlockRules();
    const auto h = HybridBlock(a, b, rules, ComparatorsFrom(comparators), {lower, upper});
    return nlohmann::json{{"auto_matches", nlohmann::json::parse(PairsJson(a, b, h.auto_matches))},
                          {"escalated", nlohmann::json::parse(PairsJson(a, b, h.escalated))},
                          {"auto_nonmatches_count", h.auto_nonmatches_count},
                          {"rule_candidates", h.rule_candidates.size()}}
        .dump();
  }, py::arg("a"), py::arg("b"), py::arg("lower") = 0.65, py::arg("upper") = 1.0,
     py::arg("comparators_json") = py::none());

  m.def("render_match_prompt", [](const Dataset& a, const Dataset& b, const PairTuple& pair) {
    const auto idx = IndexOf(a, b, pair);
    return RenderMatchPrompt({a[idx.left], b[idx.right]});
  }, py::arg("a"), py::arg("b"), py::arg("pair"));

  m.def("match_cascade", [](const Dataset& a, const Dataset& b, const std::vector<PairTuple>& pairs,
                            double lower, double upper, const std::string& target,
                            std::optional<std::string> llm_url, std::optional<std::string> llm_model,
                            int llm_retries, std::optional<std::string> comparators) {
    std::vector<CandidatePair> cps;
    for (const auto& p : pairs) cps.push_back({IndexOf(a, b, p), 0, {}});
    const auto t = EscalationTargetFromString(target);
    if (!t) throw ConfigError("escalation target must be llm, human_queue or non_match_default");
    std::optional<LlmEndpointConfig> llm;
    if (llm_url) {
      llm.emplace();
      llm->url = *llm_url;
      if (llm_model) llm->model = *llm_model;
      llm->max_retries = llm_retries;
      llm->Validate();
    }
    const CascadePolicy policy{{lower, upper}, *t};
    policy.band.Validate();
    CascadeResult r;
    {
      py::gil_scoped_release release;
      r = MatchCascade(a, b, CandidatePairSet(std::move(cps)), policy, ComparatorsFrom(comparators), llm);
    }
    auto decisions = nlohmann::json::array();
    for (const auto& d : r.decisions) {
      decisions.push_back({{"left_id", d.pair.left}, {"right_id", d.pair.right},
                           {"verdict", ToString(d.verdict)}, {"stage", ToString(d.stage)},
                           {"score", d.score ? nlohmann::json(*d.score) : nlohmann::json(nullptr)}});
    }
    auto queued = nlohmann::json::array();
    for (const auto& q : r.queued) {
      queued.push_back({{"left_id", a[q.index.left].record_id}, {"right_id", b[q.index.right].record_id},
                        {"overall_score", q.score.overall_score}, {"reason", q.reason}});
    }
    return nlohmann::json{{"decisions", decisions}, {"queued", queued}, {"llm_calls", r.llm_calls}}.dump();
  }, py::arg("a"), py::arg("b"), py::arg("pairs"), py::arg("lower") = 0.65, py::arg("upper") = 1.0,
     py::arg("target") = "human_queue", py::arg("llm_url") = py::none(), py::arg("llm_model") = py::none(),
     py::arg("llm_retries") = 2, py::arg("comparators_json") = py::none());

  m.def("eval_matching", [](const std::vector<std::tuple<std::string, std::string, bool>>& decisions,
                            const std::vector<PairTuple>& truth) {
    std::vector<MatchDecision> ds;
    for (const auto& [l, r, match] : decisions) ds.push_back({{l, r}, match ? Verdict::Match : Verdict::NonMatch});
    return EvalMatching(ds, ToPairIds(truth)).ToJson().dump();
  }, py::arg("decisions"), py::arg("truth"));

  m.def("eval_blocking", [](const std::vector<PairTuple>& candidates, const std::vector<PairTuple>& truth,
                            std::size_t n_a, std::size_t n_b, std::optional<std::size_t> baseline) {
    return EvalBlocking(ToPairIds(candidates), ToPairIds(truth), n_a, n_b, baseline).ToJson().dump();
  }, py::arg("candidates"), py::arg("truth"), py::arg("n_a"), py::arg("n_b"), py::arg("baseline") = py::none());

  m.def("sweep", [](const Dataset& a, const Dataset& b, const std::vector<PairTuple>& truth,
                    std::vector<std::size_t> ks, std::vector<double> taus, std::size_t threads) {
    if (ks.empty()) ks = DefaultSweepK();
    if (taus.empty()) taus = DefaultSweepTau();
    const auto t = ToPairIds(truth);
    SweepGrid grid;
    {
      py::gil_scoped_release release;
      grid = RunSweep(a, b, NgramHashProvider(), ks, taus, t, threads);
    }
    std::ostringstream csv;
    WriteSweepCsv(csv, grid);
    return csv.str();
  }, py::arg("a"), py::arg("b"), py::arg("truth"), py::arg("k") = std::vector<std::size_t>{},
     py::arg("tau") = std::vector<double>{}, py::arg("threads") = 0);
}
