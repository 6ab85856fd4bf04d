#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mcltsgd::io {

// 17-significant-digit formatting (printf %.17g): round-trips every double
// bit-exactly so reruns produce byte-identical artifacts.
std::string format_double(double x);

// FNV-1a 64-bit hash; used to fingerprint canonicalized configs.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t value);

// Writes content to path atomically: temp file in the same directory, then
// rename. Parent directories are created as needed.
void write_text_atomic(const std::string& path, const std::string& content);

// Comma-separated table with "#"-prefixed comment headers and footers.
// Cells are written verbatim; cells containing commas, quotes, or newlines
// are rejected (the emitted schemas never need escaping).
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_comment(const std::string& line);         // before the header
  void add_footer_comment(const std::string& line);  // after the rows
  void add_row(const std::vector<std::string>& cells);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t row_count() const { return rows_.size(); }

  std::string str() const;
  void write(const std::string& path) const;  // atomic

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> footer_comments_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace mcltsgd::io
