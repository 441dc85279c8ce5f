#include "reclink/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "reclink/csv.hpp"
#include "reclink/error.hpp"
#include "reclink/text_sim.hpp"

namespace reclink {

namespace embedded {
extern const char* const kFemaleFirst;
extern const char* const kMaleFirst;
extern const char* const kLast;
extern const char* const kStreets;
extern const char* const kNicknames;
}  // namespace embedded

namespace {

std::vector<std::string> Lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

// mt19937_64 output is fully specified by the standard; the distribution
// helpers below are ours so results do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t Next() { return gen_(); }
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }
  std::size_t Below(std::size_t n) { return static_cast<std::size_t>(Next() % n); }
  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double skew) : cumulative_(n) {
    double total = 0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), skew);
      cumulative_[r] = total;
    }
  }
  std::size_t operator()(Rng& rng) const {
    const double x = rng.Uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

struct Person {
  std::string first, middle, last, sex, ssn, address;
  Date dob;
  bool has_middle = true;
};

std::string Typo(const std::string& s, Rng& rng) {
  if (s.empty()) return s;
  std::string out = s;
  const std::size_t pos = rng.Below(s.size());
  if (s.size() >= 2 && rng.Bernoulli(0.5)) {
    const std::size_t i = std::min(pos, s.size() - 2);
    if (out[i] != out[i + 1]) {
      std::swap(out[i], out[i + 1]);
      return out;
    }
  }
  char c;
  do {
    c = static_cast<char>('A' + rng.Below(26));
  } while (c == out[pos]);
  out[pos] = c;
  return out;
}

Date JitterDay(const Date& d, Rng& rng) {
  using namespace std::chrono;
  const unsigned last = static_cast<unsigned>(year_month_day_last{d.year(), month_day_last{d.month()}}.day());
  unsigned day;
  do {
    day = 1 + static_cast<unsigned>(rng.Below(last));
  } while (day == static_cast<unsigned>(d.day()));
  return Date{d.year(), d.month(), std::chrono::day{day}};
}

PatientRecord ToRecord(const Person& p, Source src) {
  PatientRecord r;
  r.source = src;
  r.first_name = p.first;
  if (p.has_middle) r.middle_name = p.middle;
  r.last_name = p.last;
  r.birth_date = p.dob;
  r.sex = p.sex;
  r.ssn = p.ssn;
  r.address = p.address;
  return r;
}

std::string PaddedId(char prefix, std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, n);
  return buf;
}

void CheckProbability(double p, const char* name) {
  if (!(p >= 0 && p <= 1)) throw ConfigError(std::string(name) + " must lie in [0,1]");
}

}  // namespace

void CorpusSpec::Validate() const {
  if (n_persons < 1) throw ConfigError("n_persons must be >= 1");
  CheckProbability(p_in_a, "p_in_a");
  CheckProbability(p_in_b, "p_in_b");
  CheckProbability(no_middle_name_rate, "no_middle_name_rate");
  CheckProbability(missing_ssn_b, "missing_ssn_b");
  CheckProbability(missing_addr_b, "missing_addr_b");
  CheckProbability(perturb.typo_rate, "typo_rate");
  CheckProbability(perturb.nickname_swap_rate, "nickname_swap_rate");
  CheckProbability(perturb.dob_day_jitter_rate, "dob_day_jitter_rate");
  if (perturb.max_errors_per_record < 0) throw ConfigError("max_errors_per_record must be >= 0");
  if (!(name_skew >= 0)) throw ConfigError("name_skew must be >= 0");
}

nlohmann::json CorpusSpec::ToJson() const {
  return {{"n_persons", n_persons},
          {"p_in_a", p_in_a},
          {"p_in_b", p_in_b},
          {"no_middle_name_rate", no_middle_name_rate},
          {"missing_ssn_b", missing_ssn_b},
          {"missing_addr_b", missing_addr_b},
          {"name_skew", name_skew},
          {"seed", seed},
          {"perturb",
           {{"typo_rate", perturb.typo_rate},
            {"nickname_swap_rate", perturb.nickname_swap_rate},
            {"dob_day_jitter_rate", perturb.dob_day_jitter_rate},
            {"max_errors_per_record", perturb.max_errors_per_record}}}};
}

CorpusSpec CorpusSpec::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("corpus spec must be an object");
  CorpusSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_persons") s.n_persons = v.get<std::size_t>();
      else if (key == "p_in_a") s.p_in_a = v.get<double>();
      else if (key == "p_in_b") s.p_in_b = v.get<double>();
      else if (key == "no_middle_name_rate") s.no_middle_name_rate = v.get<double>();
      else if (key == "missing_ssn_b") s.missing_ssn_b = v.get<double>();
      else if (key == "missing_addr_b") s.missing_addr_b = v.get<double>();
      else if (key == "name_skew") s.name_skew = v.get<double>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "perturb") {
        if (!v.is_object()) throw ConfigError("corpus.perturb must be an object");
        for (const auto& [pk, pv] : v.items()) {
          if (pk == "typo_rate") s.perturb.typo_rate = pv.get<double>();
          else if (pk == "nickname_swap_rate") s.perturb.nickname_swap_rate = pv.get<double>();
          else if (pk == "dob_day_jitter_rate") s.perturb.dob_day_jitter_rate = pv.get<double>();
          else if (pk == "max_errors_per_record") s.perturb.max_errors_per_record = pv.get<int>();
          else throw ConfigError("unknown key corpus.perturb." + pk);
        }
      } else {
        throw ConfigError("unknown key corpus." + key);
      }
    }
  } catch (const nlohmann::json::type_error& e) {
    throw ConfigError(std::string("corpus spec: ") + e.what());
  }
  s.Validate();
  return s;
}

const NamePools& NamePools::Bundled() {
  static const NamePools pools = [] {
    NamePools p;
    p.female_first = Lines(embedded::kFemaleFirst);
    p.male_first = Lines(embedded::kMaleFirst);
    p.last = Lines(embedded::kLast);
    p.streets = Lines(embedded::kStreets);
    for (const auto& line : Lines(embedded::kNicknames)) {
      const auto sp = line.find(' ');
      if (sp != std::string::npos) p.nicknames.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
    return p;
  }();
  return pools;
}

Corpus GenerateCorpus(const CorpusSpec& spec, const NamePools& pools) {
  spec.Validate();
  if (pools.female_first.size() < 2 || pools.male_first.size() < 2 || pools.last.empty() ||
      pools.streets.empty()) {
    throw ConfigError("name pools are empty");
  }
  Rng rng(spec.seed);
  const ZipfSampler female(pools.female_first.size(), spec.name_skew);
  const ZipfSampler male(pools.male_first.size(), spec.name_skew);
  const ZipfSampler surname(pools.last.size(), spec.name_skew);
  const std::unordered_map<std::string, std::string> nick(pools.nicknames.begin(),
                                                          pools.nicknames.end());

  using std::chrono::sys_days;
  const auto dob_min = sys_days{Date{std::chrono::year{1930}, std::chrono::January, std::chrono::day{1}}};
  const auto dob_max = sys_days{Date{std::chrono::year{2004}, std::chrono::December, std::chrono::day{31}}};
  const auto dob_span = static_cast<std::size_t>((dob_max - dob_min).count() + 1);

  std::vector<Person> persons(spec.n_persons);
  std::set<std::string> ssns;
  // Identities sharing sex and birth month are kept apart on every name, so no
  // two people can agree on all comparators even after a B-side typo.
  std::map<std::tuple<std::string, int, unsigned>, std::vector<std::size_t>> by_month;
  const auto clash = [&](const Person& p, const Person& q) {
    const auto close = [](const std::string& x, const std::string& y) {
      return JaroWinkler(x, y) >= kIdentityNameSeparation;
    };
    return close(p.first, q.first) && close(p.last, q.last) &&
           (!p.has_middle || !q.has_middle || close(p.middle, q.middle));
  };
  for (std::size_t i = 0; i < persons.size(); ++i) {
    Person& p = persons[i];
    std::vector<std::size_t>* bucket = nullptr;
    bool ok = false;
    do {
      const bool is_female = rng.Bernoulli(0.5);
      const auto& pool = is_female ? pools.female_first : pools.male_first;
      const auto& sampler = is_female ? female : male;
      p.sex = is_female ? "F" : "M";
      p.first = pool[sampler(rng)];
      p.has_middle = !rng.Bernoulli(spec.no_middle_name_rate);
      do {
        p.middle = pool[rng.Below(pool.size())];
      } while (p.middle == p.first);
      p.last = pools.last[surname(rng)];
      p.dob = Date{dob_min + std::chrono::days{static_cast<long>(rng.Below(dob_span))}};
      bucket = &by_month[{p.sex, static_cast<int>(p.dob.year()),
                          static_cast<unsigned>(p.dob.month())}];
      ok = std::none_of(bucket->begin(), bucket->end(),
                        [&](std::size_t j) { return clash(p, persons[j]); });
    } while (!ok);
    bucket->push_back(i);

    // Area numbers 900-999 are never issued as SSNs.
    do {
      char buf[16];
      std::snprintf(buf, sizeof buf, "9%02zu%02zu%04zu", rng.Below(100), 1 + rng.Below(99),
                    1 + rng.Below(9999));
      p.ssn = buf;
    } while (!ssns.insert(p.ssn).second);
    p.address = std::to_string(1 + rng.Below(9999)) + " " + pools.streets[rng.Below(pools.streets.size())];
  }

  std::vector<std::size_t> in_a, in_b;
  for (std::size_t i = 0; i < persons.size(); ++i) {
    if (rng.Bernoulli(spec.p_in_a)) in_a.push_back(i);
    if (rng.Bernoulli(spec.p_in_b)) in_b.push_back(i);
  }
  rng.Shuffle(in_a);
  rng.Shuffle(in_b);

  std::vector<PatientRecord> a_records, b_records;
  std::unordered_map<std::size_t, std::string> a_id_of;
  for (std::size_t k = 0; k < in_a.size(); ++k) {
    auto r = ToRecord(persons[in_a[k]], Source::A);
    r.record_id = PaddedId('A', k + 1);
    a_id_of[in_a[k]] = r.record_id;
    a_records.push_back(std::move(r));
  }

  const auto& pp = spec.perturb;
  std::vector<PairId> truth;
  for (std::size_t k = 0; k < in_b.size(); ++k) {
    const Person& p = persons[in_b[k]];
    PatientRecord r = ToRecord(p, Source::B);
    r.record_id = PaddedId('B', k + 1);

    enum Error { kTypoFirst, kTypoMiddle, kTypoLast, kNickname, kJitter };
    std::vector<Error> errors;
    if (rng.Bernoulli(pp.typo_rate)) errors.push_back(kTypoFirst);
    if (rng.Bernoulli(pp.typo_rate) && p.has_middle) errors.push_back(kTypoMiddle);
    if (rng.Bernoulli(pp.typo_rate)) errors.push_back(kTypoLast);
    if (rng.Bernoulli(pp.nickname_swap_rate) && nick.contains(p.first)) errors.push_back(kNickname);
    if (rng.Bernoulli(pp.dob_day_jitter_rate)) errors.push_back(kJitter);
    rng.Shuffle(errors);
    // A nickname replaces the whole first name, so a first-name typo on top is moot.
    if (errors.size() > static_cast<std::size_t>(pp.max_errors_per_record)) {
      errors.resize(static_cast<std::size_t>(pp.max_errors_per_record));
    }
    std::sort(errors.begin(), errors.end());
    for (Error e : errors) {
      switch (e) {
        case kTypoFirst: r.first_name = Typo(*r.first_name, rng); break;
        case kTypoMiddle: r.middle_name = Typo(*r.middle_name, rng); break;
        case kTypoLast: r.last_name = Typo(*r.last_name, rng); break;
        case kNickname: r.first_name = nick.at(p.first); break;
        case kJitter: r.birth_date = JitterDay(p.dob, rng); break;
      }
    }
    if (rng.Bernoulli(spec.missing_ssn_b)) r.ssn.reset();
    if (rng.Bernoulli(spec.missing_addr_b)) r.address.reset();

    if (auto it = a_id_of.find(in_b[k]); it != a_id_of.end()) truth.push_back({it->second, r.record_id});
    b_records.push_back(std::move(r));
  }
  std::sort(truth.begin(), truth.end());

  return {Dataset(Source::A, std::move(a_records), "generated:A"),
          Dataset(Source::B, std::move(b_records), "generated:B"), std::move(truth)};
}

void WriteTruthCsv(std::ostream& out, const std::vector<PairId>& truth) {
  csv::WriteRow(out, {"left_id", "right_id"});
  for (const auto& t : truth) csv::WriteRow(out, {t.left, t.right});
}

std::vector<PairId> ReadTruthCsv(std::istream& in, const std::string& label) {
  csv::Reader reader(in);
  auto header = reader.Next();
  if (!header || header->size() < 2 || (*header)[0] != "left_id" || (*header)[1] != "right_id") {
    throw DataError("expected a left_id,right_id header", label);
  }
  std::vector<PairId> out;
  std::size_t row = 0;
  while (auto f = reader.Next()) {
    ++row;
    if (f->size() < 2) throw DataError("wrong field count", label, row);
    out.push_back({(*f)[0], (*f)[1]});
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw DataError("duplicate truth pair", label);
  }
  return out;
}

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write", (dir / name).string());
    return out;
  };
  {
    auto out = open("A.csv");
    WriteRecordsCsv(out, corpus.a.records());
  }
  {
    auto out = open("B.csv");
    WriteRecordsCsv(out, corpus.b.records());
  }
  auto out = open("truth.csv");
  WriteTruthCsv(out, corpus.truth);
}

}  // namespace reclink
