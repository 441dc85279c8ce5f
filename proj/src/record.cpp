#include "reclink/record.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reclink/csv.hpp"
#include "reclink/error.hpp"

namespace reclink {

namespace embedded {
extern const char* const kMatchPromptV1;
}

std::string_view ToString(Source s) { return s == Source::A ? "A" : "B"; }

std::string_view ColumnName(Field f) {
  switch (f) {
    case Field::FirstName: return "first_name";
    case Field::MiddleName: return "middle_name";
    case Field::LastName: return "last_name";
    case Field::BirthDate: return "birth_date";
    case Field::Ssn: return "ssn";
    case Field::Sex: return "sex";
    case Field::Address: return "address";
  }
  return {};
}

std::string_view AttributeName(Field f) {
  switch (f) {
    case Field::FirstName: return "FirstName";
    case Field::MiddleName: return "MiddleName";
    case Field::LastName: return "LastName";
    case Field::BirthDate: return "DateOfBirth";
    case Field::Ssn: return "SSN";
    case Field::Sex: return "Sex";
    case Field::Address: return "Address";
  }
  return {};
}

std::string_view PromptLabel(Field f) {
  switch (f) {
    case Field::FirstName: return "First Name";
    case Field::MiddleName: return "Middle Name";
    case Field::LastName: return "Last Name";
    case Field::BirthDate: return "Date of Birth";
    case Field::Ssn: return "SSN";
    case Field::Sex: return "Sex";
    case Field::Address: return "Address";
  }
  return {};
}

std::optional<Field> FieldFromColumn(std::string_view name) {
  for (Field f : kAllFields) {
    if (ColumnName(f) == name) return f;
  }
  return std::nullopt;
}

std::optional<Date> ParseIsoDate(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string FormatIsoDate(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<std::string> PatientRecord::Text(Field f) const {
  switch (f) {
    case Field::FirstName: return first_name;
    case Field::MiddleName: return middle_name;
    case Field::LastName: return last_name;
    case Field::BirthDate:
      if (!birth_date) return std::nullopt;
      return FormatIsoDate(*birth_date);
    case Field::Ssn: return ssn;
    case Field::Sex: return sex;
    case Field::Address: return address;
  }
  return std::nullopt;
}

bool PatientRecord::Has(Field f) const {
  switch (f) {
    case Field::FirstName: return first_name.has_value();
    case Field::MiddleName: return middle_name.has_value();
    case Field::LastName: return last_name.has_value();
    case Field::BirthDate: return birth_date.has_value();
    case Field::Ssn: return ssn.has_value();
    case Field::Sex: return sex.has_value();
    case Field::Address: return address.has_value();
  }
  return false;
}

bool IsValidSsn(std::string_view s) {
  return s.size() == 9 &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Dataset::Dataset(Source source, std::vector<PatientRecord> records, std::string provenance_path)
    : source_(source), records_(std::move(records)), path_(std::move(provenance_path)) {
  by_id_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.source != source_) {
      throw DataError("record " + r.record_id + " has source " + std::string(ToString(r.source)) +
                          ", dataset is " + std::string(ToString(source_)),
                      path_, i + 1);
    }
    if (r.record_id.empty()) throw DataError("empty record_id", path_, i + 1);
    if (!by_id_.emplace(r.record_id, i).second) {
      throw DataError("duplicate record_id " + r.record_id, path_, i + 1);
    }
  }
}

std::optional<std::size_t> Dataset::IndexOf(std::string_view record_id) const {
  auto it = by_id_.find(std::string(record_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

std::string Upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::optional<std::string> Normalize(std::string_view raw) {
  std::string v = Trim(raw);
  if (v.empty() || v == "NULL") return std::nullopt;
  return v;
}

struct RowBuilder {
  Source source;
  ParseOptions options;
  const std::string& label;

  PatientRecord Build(std::size_t row, std::string_view id,
                      const std::array<std::optional<std::string>, 7>& values) const {
    PatientRecord r;
    r.source = source;
    r.record_id = Trim(id);
    if (r.record_id.empty()) throw DataError("missing record_id", label, row);

    auto get = [&](Field f) { return values[static_cast<std::size_t>(f)]; };
    auto upper = [](std::optional<std::string> v) -> std::optional<std::string> {
      if (v) return Upper(std::move(*v));
      return v;
    };
    r.first_name = upper(get(Field::FirstName));
    r.middle_name = upper(get(Field::MiddleName));
    r.last_name = upper(get(Field::LastName));
    r.sex = upper(get(Field::Sex));
    r.address = get(Field::Address);

    if (auto dob = get(Field::BirthDate)) {
      r.birth_date = ParseIsoDate(*dob);
      if (!r.birth_date && !options.lenient) {
        throw DataError("malformed birth_date \"" + *dob + "\"", label, row);
      }
    }
    if (auto ssn = get(Field::Ssn)) {
      if (IsValidSsn(*ssn)) {
        r.ssn = *ssn;
      } else if (!options.lenient) {
        throw DataError("ssn \"" + *ssn + "\" is not exactly 9 digits", label, row);
      }
    }
    return r;
  }
};

void AddUnique(std::vector<PatientRecord>& out, std::unordered_map<std::string, std::size_t>& seen,
               PatientRecord r, std::size_t row, const std::string& label) {
  auto [it, fresh] = seen.emplace(r.record_id, row);
  if (!fresh) {
    throw DataError("duplicate record_id " + r.record_id + " (first seen at row " +
                        std::to_string(it->second) + ")",
                    label, row);
  }
  out.push_back(std::move(r));
}

std::vector<PatientRecord> ReadCsv(std::istream& in, const RowBuilder& builder) {
  csv::Reader reader(in);
  auto header = reader.Next();
  if (!header) throw DataError("empty file, expected a header row", builder.label);

  std::optional<std::size_t> id_col;
  std::array<std::optional<std::size_t>, 7> cols;
  for (std::size_t i = 0; i < header->size(); ++i) {
    const std::string name = Trim((*header)[i]);
    if (name == "record_id") {
      id_col = i;
    } else if (auto f = FieldFromColumn(name)) {
      cols[static_cast<std::size_t>(*f)] = i;
    }
  }
  if (!id_col) throw DataError("header lacks record_id column", builder.label);
  for (Field f : kAllFields) {
    if (!cols[static_cast<std::size_t>(f)]) {
      throw DataError("header lacks " + std::string(ColumnName(f)) + " column", builder.label);
    }
  }

  std::vector<PatientRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t row = 0;
  while (auto fields = reader.Next()) {
    ++row;
    if (fields->size() == 1 && Trim((*fields)[0]).empty()) continue;  // blank line
    if (fields->size() != header->size()) {
      throw DataError("expected " + std::to_string(header->size()) + " fields, got " +
                          std::to_string(fields->size()),
                      builder.label, row);
    }
    std::array<std::optional<std::string>, 7> values;
    for (Field f : kAllFields) {
      const auto idx = static_cast<std::size_t>(f);
      values[idx] = Normalize((*fields)[*cols[idx]]);
    }
    AddUnique(out, seen, builder.Build(row, (*fields)[*id_col], values), row, builder.label);
  }
  return out;
}

std::vector<PatientRecord> ReadJsonLines(std::istream& in, const RowBuilder& builder) {
  std::vector<PatientRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (Trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), builder.label, row);
    }
    if (!obj.is_object()) throw DataError("expected a JSON object", builder.label, row);

    auto text = [&](std::string_view key) -> std::optional<std::string> {
      auto it = obj.find(std::string(key));
      if (it == obj.end() || it->is_null()) return std::nullopt;
      if (it->is_string()) return Normalize(it->get<std::string>());
      return Normalize(it->dump());
    };
    std::array<std::optional<std::string>, 7> values;
    for (Field f : kAllFields) values[static_cast<std::size_t>(f)] = text(ColumnName(f));
    const auto id = text("record_id");
    AddUnique(out, seen, builder.Build(row, id.value_or(""), values), row, builder.label);
  }
  return out;
}

}  // namespace

Dataset ParseRecords(std::istream& in, Source source, InputFormat format, ParseOptions options,
                     const std::string& label) {
  RowBuilder builder{source, options, label};
  auto records = format == InputFormat::Csv ? ReadCsv(in, builder) : ReadJsonLines(in, builder);
  return Dataset(source, std::move(records), label);
}

Dataset ParseRecords(const std::filesystem::path& path, Source source, InputFormat format,
                     ParseOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file", path.string());
  return ParseRecords(in, source, format, options, path.string());
}

void WriteRecordsCsv(std::ostream& out, const std::vector<PatientRecord>& records) {
  csv::Row header{"record_id"};
  for (Field f : kAllFields) header.emplace_back(ColumnName(f));
  csv::WriteRow(out, header);
  for (const auto& r : records) {
    csv::Row row{r.record_id};
    for (Field f : kAllFields) row.push_back(r.Text(f).value_or(""));
    csv::WriteRow(out, row);
  }
}

std::string SerializeForBlocking(const PatientRecord& r) {
  static constexpr std::array<Field, 5> kBlockingFields = {
      Field::FirstName, Field::MiddleName, Field::LastName, Field::BirthDate, Field::Sex};
  std::string out;
  for (std::size_t i = 0; i < kBlockingFields.size(); ++i) {
    if (i) out.push_back(' ');
    out += r.Text(kBlockingFields[i]).value_or("");
  }
  return out;
}

std::string SerializeRecordDitto(const PatientRecord& r) {
  std::string out;
  for (Field f : kAllFields) {
    if (!out.empty()) out.push_back(' ');
    out += "[COL] ";
    out += AttributeName(f);
    out += " [VAL] ";
    out += r.Text(f).value_or("Unknown");
  }
  return out;
}

std::string SerializePairDitto(const RecordPair& p) {
  return "[CLS] " + SerializeRecordDitto(p.left) + " [SEP] " + SerializeRecordDitto(p.right) +
         " [SEP]";
}

std::string_view MatchPromptTemplate() { return embedded::kMatchPromptV1; }

std::string RenderMatchPrompt(const RecordPair& p) {
  const std::string_view tpl = MatchPromptTemplate();
  std::string out;
  out.reserve(tpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const auto open = tpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    const auto close = tpl.find('}', open);
    out.append(tpl.substr(pos, open - pos));
    const std::string_view slot = tpl.substr(open + 1, close - open - 1);

    // Slots look like "record1 First Name".
    const PatientRecord& rec = slot.starts_with("record1 ") ? p.left : p.right;
    const std::string_view label = slot.substr(slot.find(' ') + 1);
    std::optional<std::string> value;
    for (Field f : kAllFields) {
      if (PromptLabel(f) == label) value = rec.Text(f);
    }
    out += value.value_or("Unknown");
    pos = close + 1;
  }
  return out;
}

}  // namespace reclink
