#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace reclink {

enum class Source : std::uint8_t { A, B };

std::string_view ToString(Source s);

/// The seven demographic fields, in canonical (prompt) order.
enum class Field : std::uint8_t { FirstName, MiddleName, LastName, BirthDate, Ssn, Sex, Address };

inline constexpr std::array<Field, 7> kAllFields = {
    Field::FirstName, Field::MiddleName, Field::LastName, Field::BirthDate,
    Field::Ssn,       Field::Sex,        Field::Address};

/// snake_case column name used by the CSV / JSON Lines formats.
std::string_view ColumnName(Field f);
/// CamelCase attribute name used by the [COL]/[VAL] serializer.
std::string_view AttributeName(Field f);
/// Human label used in the match prompt ("Date of Birth").
std::string_view PromptLabel(Field f);
/// Inverse of ColumnName; nullopt for unknown names.
std::optional<Field> FieldFromColumn(std::string_view name);

using Date = std::chrono::year_month_day;

/// Strict YYYY-MM-DD parse; nullopt if malformed or not a calendar date.
std::optional<Date> ParseIsoDate(std::string_view text);
std::string FormatIsoDate(const Date& d);

struct PatientRecord {
  std::string record_id;
  Source source = Source::A;
  std::optional<std::string> first_name;
  std::optional<std::string> middle_name;
  std::optional<std::string> last_name;
  std::optional<Date> birth_date;
  std::optional<std::string> sex;
  std::optional<std::string> ssn;
  std::optional<std::string> address;

  /// Field value as text (dates rendered YYYY-MM-DD); nullopt when missing.
  std::optional<std::string> Text(Field f) const;
  bool Has(Field f) const;

  friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

/// Exactly nine ASCII digits.
bool IsValidSsn(std::string_view s);

/// An ingested source. Records are immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError on a source mismatch or duplicate record_id.
  Dataset(Source source, std::vector<PatientRecord> records, std::string provenance_path = {});

  Source source() const { return source_; }
  const std::vector<PatientRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const PatientRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::string& path() const { return path_; }
  std::size_t row_count() const { return records_.size(); }

  /// Position of a record by id, or nullopt.
  std::optional<std::size_t> IndexOf(std::string_view record_id) const;

 private:
  Source source_ = Source::A;
  std::vector<PatientRecord> records_;
  std::string path_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// A candidate comparison: left from source A, right from source B.
struct RecordPair {
  const PatientRecord& left;
  const PatientRecord& right;
};

/// Positions of a pair inside the (A, B) datasets it was built from.
struct PairIndex {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  auto operator<=>(const PairIndex&) const = default;
};

/// Stable, dataset-independent pair identity.
struct PairId {
  std::string left;
  std::string right;
  auto operator<=>(const PairId&) const = default;
  std::string str() const { return left + "|" + right; }
};

enum class InputFormat { Csv, JsonLines };

struct ParseOptions {
  /// Lenient mode coerces malformed dates / SSNs to missing instead of rejecting.
  bool lenient = false;
};

/// Reads a record file. Empty strings, "NULL" and absent keys become missing;
/// values are trimmed and names uppercased. Throws DataError naming the row.
Dataset ParseRecords(const std::filesystem::path& path, Source source, InputFormat format,
                     ParseOptions options = {});
Dataset ParseRecords(std::istream& in, Source source, InputFormat format,
                     ParseOptions options = {}, const std::string& label = "<stream>");

/// Writes records as CSV with the canonical header.
void WriteRecordsCsv(std::ostream& out, const std::vector<PatientRecord>& records);

/// "[first] [middle] [last] [birth_date] [sex]"; missing fields become "".
std::string SerializeForBlocking(const PatientRecord& r);

/// "[COL] FirstName [VAL] JOHN ..." over all seven fields; missing -> "Unknown".
std::string SerializeRecordDitto(const PatientRecord& r);
/// "[CLS] <left> [SEP] <right> [SEP]".
std::string SerializePairDitto(const RecordPair& p);

/// The versioned yes/no prompt template, with {record1 First Name}-style slots.
std::string_view MatchPromptTemplate();
/// Fills the template for a pair; missing values render as "Unknown".
std::string RenderMatchPrompt(const RecordPair& p);

}  // namespace reclink
