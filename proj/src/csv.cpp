#include "reclink/csv.hpp"

#include "reclink/error.hpp"

namespace reclink::csv {

std::optional<Row> Reader::Next() {
  Row row;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool quoted_field = false;
  record_line_ = line_;

  int c;
  while ((c = in_.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || quoted_field) {
          throw DataError("stray quote inside unquoted field", {}, record_line_);
        }
        in_quotes = true;
        quoted_field = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        quoted_field = false;
        break;
      case '\r':
        if (in_.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line_;
        row.push_back(std::move(field));
        return row;
      default:
        field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field", {}, record_line_);
  if (!any) return std::nullopt;
  row.push_back(std::move(field));
  return row;
}

std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void WriteRow(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << Escape(row[i]);
  }
  out << '\n';
}

}  // namespace reclink::csv
