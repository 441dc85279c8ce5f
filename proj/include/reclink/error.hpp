#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reclink {

/// Invalid configuration: unknown keys, bad thresholds, empty rule lists.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data. Carries the file and 1-based data row when known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::string file = {}, std::size_t row = 0)
      : std::runtime_error(Format(what, file, row)), file_(std::move(file)), row_(row) {}

  const std::string& file() const { return file_; }
  std::size_t row() const { return row_; }

 private:
  static std::string Format(const std::string& what, const std::string& file, std::size_t row) {
    std::string out;
    if (!file.empty()) out += file + ": ";
    if (row != 0) out += "row " + std::to_string(row) + ": ";
    return out + what;
  }

  std::string file_;
  std::size_t row_;
};

/// Failure talking to an external service (embedding or LLM endpoint).
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, long batch_index = -1)
      : std::runtime_error(batch_index >= 0 ? "batch " + std::to_string(batch_index) + ": " + what
                                            : what),
        batch_index_(batch_index) {}

  /// Index of the failing request batch, or -1 when not batch-scoped.
  long batch_index() const { return batch_index_; }

 private:
  long batch_index_;
};

/// LLM answered with something other than a single yes/no token.
class UnparseableResponse : public std::runtime_error {
 public:
  UnparseableResponse(std::string pair_id, std::string raw)
      : std::runtime_error("unparseable LLM response for pair " + pair_id + ": \"" + raw + "\""),
        pair_id_(std::move(pair_id)),
        raw_(std::move(raw)) {}

  const std::string& pair_id() const { return pair_id_; }
  const std::string& raw_response() const { return raw_; }

 private:
  std::string pair_id_;
  std::string raw_;
};

}  // namespace reclink
