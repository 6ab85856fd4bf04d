#include "mcltsgd/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "mcltsgd/errors.hpp"

namespace mcltsgd::io {

std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) {
      throw ConfigError("cannot create directory " +
                        target.parent_path().string() + ": " + ec.message());
    }
  }
  const std::filesystem::path temp(path + ".tmp");
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ConfigError("cannot open " + temp.string() + " for writing");
    }
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw ConfigError("short write to " + temp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    throw ConfigError("cannot rename " + temp.string() + " to " + path +
                      ": " + ec.message());
  }
}

namespace {

void check_cell(const std::string& cell) {
  for (const char c : cell) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      throw ConfigError("csv cell needs escaping, which no emitted schema "
                        "should: \"" +
                        cell + "\"");
    }
  }
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> columns)
    : columns_(std::move(columns)) {
  if (columns_.empty()) throw ConfigError("csv needs at least one column");
  for (const auto& c : columns_) check_cell(c);
}

void CsvWriter::add_comment(const std::string& line) {
  comments_.push_back(line);
}

void CsvWriter::add_footer_comment(const std::string& line) {
  footer_comments_.push_back(line);
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) {
    throw ConfigError("csv row has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(columns_.size()));
  }
  for (const auto& c : cells) check_cell(c);
  rows_.push_back(cells);
}

std::string CsvWriter::str() const {
  std::string out;
  for (const auto& c : comments_) {
    out += "# ";
    out += c;
    out += '\n';
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i > 0) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  for (const auto& c : footer_comments_) {
    out += "# ";
    out += c;
    out += '\n';
  }
  return out;
}

void CsvWriter::write(const std::string& path) const {
  write_text_atomic(path, str());
}

}  // namespace mcltsgd::io
