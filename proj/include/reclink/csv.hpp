#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace reclink::csv {

using Row = std::vector<std::string>;

/// Streaming RFC 4180 reader. Quoted fields may contain separators, doubled
/// quotes and line breaks. CRLF and LF line endings are both accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input.
  std::optional<Row> Next();

  /// Physical line on which the last returned record started (1-based).
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

/// Quote a field when it contains a separator, quote, or line break.
std::string Escape(std::string_view field);

void WriteRow(std::ostream& out, const Row& row);

}  // namespace reclink::csv
