#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "reclink/record.hpp"

namespace reclink::testing {

inline std::filesystem::path SourceDir() { return RECLINK_SOURCE_DIR; }
inline std::filesystem::path FixtureDir() { return SourceDir() / "tests" / "fixtures"; }
inline std::filesystem::path GoldenDir() { return SourceDir() / "tests" / "golden"; }

inline Date D(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

/// Builds a record; empty strings mean missing.
inline PatientRecord Rec(std::string id, Source src, std::string first, std::string middle,
                         std::string last, std::optional<Date> dob, std::string sex,
                         std::string ssn = {}, std::string address = {}) {
  PatientRecord r;
  r.record_id = std::move(id);
  r.source = src;
  auto opt = [](std::string s) -> std::optional<std::string> {
    if (s.empty()) return std::nullopt;
    return s;
  };
  r.first_name = opt(std::move(first));
  r.middle_name = opt(std::move(middle));
  r.last_name = opt(std::move(last));
  r.birth_date = dob;
  r.sex = opt(std::move(sex));
  r.ssn = opt(std::move(ssn));
  r.address = opt(std::move(address));
  return r;
}

/// Small random dataset over a handful of short names, for oracle comparisons.
inline Dataset RandomDataset(Source src, std::size_t n, std::uint64_t seed) {
  static const char* kFirst[] = {"JOHN", "JON", "MARY", "MARIE", "ANN", "ANNA", "PETER", "PETRA"};
  static const char* kLast[] = {"DOE", "DOW", "ROE", "SMITH", "SMYTH", "LEE", "LEA"};
  std::mt19937_64 rng(seed);
  std::vector<PatientRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = std::string(src == Source::A ? "A" : "B") + std::to_string(i);
    const bool has_dob = rng() % 5 != 0;
    out.push_back(Rec(id, src, kFirst[rng() % 8], rng() % 3 == 0 ? "" : kFirst[rng() % 8],
                      kLast[rng() % 7],
                      has_dob ? std::optional<Date>(D(1950 + static_cast<int>(rng() % 4),
                                                      1 + static_cast<unsigned>(rng() % 2), 1 + static_cast<unsigned>(rng() % 3)))
                              : std::nullopt,
                      rng() % 2 ? "M" : "F"));
  }
  return Dataset(src, std::move(out));
}

}  // namespace reclink::testing
