#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skillspace {

// A small rectangular table of already-formatted cells. Every report in the
// project renders through this so CSV and aligned text stay in sync.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string to_csv() const;
  // Left-aligned first column, right-aligned numeric-looking columns.
  std::string to_text() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// RFC 4180 style escaping: quotes a field only when it needs it.
std::string csv_escape(std::string_view field);
std::vector<std::string> csv_split(std::string_view line);

// Headered CSV loaded fully into memory. Blank lines and lines starting
// with '#' are ignored.
class CsvFile {
 public:
  static CsvFile read(const std::filesystem::path& path);
  static CsvFile parse(std::string_view text);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  // Throws Error("MissingColumn") if absent.
  std::size_t require_column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::size_t col) const {
    return rows_[row][col];
  }
  // Line number in the source text of a data row (1-based, header is line 1).
  std::size_t line_of(std::size_t row) const { return lines_[row]; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

// Shortest decimal that round-trips the value.
std::string format_double(double value);
// Fixed number of significant digits, for human-facing tables.
std::string format_sig(double value, int digits = 4);

}  // namespace skillspace
