#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillspace/error.hpp"
#include "skillspace/tabular.hpp"

namespace skillspace::corpus {

class CorpusError : public Error {
 public:
  CorpusError(std::string kind, const std::string& message, std::size_t line = 0)
      : Error(std::move(kind), message), line_(line) {}

  // 1-based source line, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// One changed file: the training "document".
struct DeltaRecord {
  std::string language;
  std::string project;
  std::int64_t timestamp = 0;
  std::string developer;
  std::vector<std::string> apis;

  bool operator==(const DeltaRecord&) const = default;
};

// `language;project;timestamp;developer;api1;api2;...`
DeltaRecord parse_delta_line(std::string_view line, std::size_t line_no = 0);
// Throws CorpusError("InvalidRecord") for records the line format cannot carry.
std::string format_delta_line(const DeltaRecord& record);
void validate_record(const DeltaRecord& record);

// Streaming reader; gzip input is detected from content, not the suffix.
class CorpusReader {
 public:
  explicit CorpusReader(const std::filesystem::path& path);
  ~CorpusReader();
  CorpusReader(const CorpusReader&) = delete;
  CorpusReader& operator=(const CorpusReader&) = delete;

  // False at end of input. Parse errors carry the line number.
  bool next(DeltaRecord& record);
  std::size_t line_number() const { return line_no_; }

 private:
  bool read_line(std::string& line);

  struct Handle;
  std::unique_ptr<Handle> handle_;
  std::size_t line_no_ = 0;
};

// Streaming writer. Output appears at `path` only after commit(); a ".gz"
// suffix selects gzip compression.
class CorpusWriter {
 public:
  explicit CorpusWriter(const std::filesystem::path& path);
  ~CorpusWriter();
  CorpusWriter(const CorpusWriter&) = delete;
  CorpusWriter& operator=(const CorpusWriter&) = delete;

  void write(const DeltaRecord& record);
  void commit();
  std::size_t written() const { return written_; }

 private:
  struct Handle;
  std::unique_ptr<Handle> handle_;
  std::size_t written_ = 0;
};

std::vector<DeltaRecord> read_corpus(const std::filesystem::path& path);
void write_corpus(std::span<const DeltaRecord> records,
                  const std::filesystem::path& path);
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(DeltaRecord&&)>& fn);

// raw id -> canonical id. Chains are collapsed on load so every canonical id
// is a fixed point; cycles are rejected.
class AliasMap {
 public:
  AliasMap() = default;

  static AliasMap parse(std::string_view tsv);
  static AliasMap load(const std::filesystem::path& path);
  static AliasMap from_pairs(
      std::span<const std::pair<std::string, std::string>> pairs);

  const std::string& resolve(const std::string& id) const;
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }

 private:
  void finalize();

  std::unordered_map<std::string, std::string> map_;
};

void apply_aliases(std::span<DeltaRecord> records, const AliasMap& dev_map,
                   const AliasMap& proj_map);
void apply_aliases(DeltaRecord& record, const AliasMap& dev_map,
                   const AliasMap& proj_map);

enum class OversizePolicy { kDrop, kTruncate };

struct FilterConfig {
  std::int64_t min_commits = 100;
  std::int64_t max_commits = 25000;
  std::size_t max_apis_per_delta = 30;
  OversizePolicy oversize = OversizePolicy::kDrop;

  void validate() const;
};

struct FilterReport {
  std::size_t input_deltas = 0;
  std::size_t developers_seen = 0;
  std::size_t developers_below_min = 0;
  std::size_t developers_above_max = 0;
  std::size_t deltas_removed_commit_bounds = 0;
  std::size_t deltas_dropped_oversize = 0;
  std::size_t deltas_truncated = 0;
  std::size_t output_deltas = 0;

  Table to_table() const;
  std::string to_text() const;
};

using DeveloperCounts = std::unordered_map<std::string, std::int64_t>;

// Second pass of the two-pass filter; the first pass is the delta count per
// developer (the commit-count proxy).
class CorpusFilter {
 public:
  CorpusFilter(FilterConfig cfg, DeveloperCounts counts);

  std::optional<DeltaRecord> apply(DeltaRecord record);
  FilterReport report() const;

 private:
  FilterConfig cfg_;
  DeveloperCounts counts_;
  FilterReport report_;
};

struct FilterResult {
  std::vector<DeltaRecord> records;
  FilterReport report;
};

DeveloperCounts count_developers(std::span<const DeltaRecord> records);
FilterResult filter_corpus(std::vector<DeltaRecord> records,
                           const FilterConfig& cfg);

struct TimeSplit {
  std::vector<DeltaRecord> train;
  std::vector<DeltaRecord> test;
};

// train = {ts < cutoff}, test = {ts >= cutoff}; input order is preserved.
TimeSplit time_split(std::vector<DeltaRecord> records, std::int64_t cutoff);

// Keeps the records of `n_projects` projects drawn uniformly without
// replacement (all of them when fewer exist).
std::vector<DeltaRecord> sample_projects(std::vector<DeltaRecord> records,
                                         std::size_t n_projects,
                                         std::uint64_t seed);

struct CorpusStats {
  std::size_t deltas = 0;
  std::size_t authors = 0;
  std::size_t projects = 0;
  std::size_t distinct_apis = 0;
  double fraction_small = 1.0;  // deltas with <= threshold APIs
  std::size_t max_apis = 0;
};

struct CorpusSummary {
  std::map<std::string, CorpusStats> per_language;
  CorpusStats total;

  Table to_table() const;
};

class StatsAccumulator {
 public:
  explicit StatsAccumulator(std::size_t small_threshold = 30)
      : threshold_(small_threshold) {}

  void add(const DeltaRecord& record);
  CorpusSummary finish() const;

 private:
  struct Group;
  std::size_t threshold_;
  std::map<std::string, std::shared_ptr<Group>> groups_;
  std::shared_ptr<Group> total_;
};

CorpusSummary corpus_stats(std::span<const DeltaRecord> records,
                           std::size_t small_threshold = 30);

}  // namespace skillspace::corpus
