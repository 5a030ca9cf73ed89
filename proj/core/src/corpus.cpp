#include "skillspace/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <zlib.h>

#include "skillspace/atomic_file.hpp"
#include "skillspace/rng.hpp"

namespace skillspace::corpus {

namespace {

bool has_forbidden(std::string_view s) {
  return s.find_first_of(";\n\r") != std::string_view::npos;
}

}  // namespace

DeltaRecord parse_delta_line(std::string_view line, std::size_t line_no) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
    line.remove_suffix(1);

  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(';', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (fields.size() < 5) {
    throw CorpusError("BadFieldCount",
                      fmt::format("line {}: expected at least 5 fields, got {}",
                                  line_no, fields.size()),
                      line_no);
  }

  DeltaRecord rec;
  rec.language = fields[0];
  rec.project = fields[1];
  rec.developer = fields[3];
  if (rec.language.empty() || rec.project.empty() || rec.developer.empty()) {
    throw CorpusError("EmptyField",
                      fmt::format("line {}: empty language, project or developer",
                                  line_no),
                      line_no);
  }

  const std::string_view ts = fields[2];
  auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), rec.timestamp);
  if (ts.empty() || ec != std::errc() || ptr != ts.data() + ts.size() ||
      rec.timestamp < 0) {
    throw CorpusError("BadTimestamp",
                      fmt::format("line {}: bad timestamp '{}'", line_no, ts),
                      line_no);
  }

  for (std::size_t i = 4; i < fields.size(); ++i)
    if (!fields[i].empty()) rec.apis.emplace_back(fields[i]);
  if (rec.apis.empty()) {
    throw CorpusError("BadFieldCount",
                      fmt::format("line {}: record has no APIs", line_no), line_no);
  }
  return rec;
}

void validate_record(const DeltaRecord& r) {
  auto bad = [&](const std::string& why) {
    throw CorpusError("InvalidRecord", why + " (project '" + r.project +
                                           "', developer '" + r.developer + "')");
  };
  if (r.language.empty() || r.project.empty() || r.developer.empty())
    bad("empty identifier");
  if (has_forbidden(r.language) || has_forbidden(r.project) ||
      has_forbidden(r.developer))
    bad("identifier contains ';' or a line break");
  if (r.timestamp < 0) bad("negative timestamp");
  if (r.apis.empty()) bad("no APIs");
  for (const auto& api : r.apis)
    if (api.empty() || has_forbidden(api)) bad("invalid API token '" + api + "'");
}

std::string format_delta_line(const DeltaRecord& r) {
  validate_record(r);
  std::string out;
  out.reserve(64 + r.apis.size() * 16);
  out += r.language;
  out += ';';
  out += r.project;
  out += ';';
  out += std::to_string(r.timestamp);
  out += ';';
  out += r.developer;
  for (const auto& api : r.apis) {
    out += ';';
    out += api;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Streaming I/O

struct CorpusReader::Handle {
  gzFile file = nullptr;
  ~Handle() {
    if (file) gzclose(file);
  }
};

CorpusReader::CorpusReader(const std::filesystem::path& path)
    : handle_(std::make_unique<Handle>()) {
  handle_->file = gzopen(path.c_str(), "rb");
  if (!handle_->file) throw IoError("cannot open corpus " + path.string());
  gzbuffer(handle_->file, 1 << 17);
}

CorpusReader::~CorpusReader() = default;

bool CorpusReader::read_line(std::string& line) {
  line.clear();
  char buf[8192];
  while (true) {
    if (!gzgets(handle_->file, buf, sizeof(buf))) {
      int err = 0;
      const char* msg = gzerror(handle_->file, &err);
      if (err != Z_OK && err != Z_STREAM_END) {
        throw IoError(fmt::format("corpus read failed after line {}: {}",
                                  line_no_, msg));
      }
      return !line.empty();
    }
    line += buf;
    if (!line.empty() && line.back() == '\n') return true;
  }
}

bool CorpusReader::next(DeltaRecord& record) {
  std::string line;
  while (read_line(line)) {
    ++line_no_;
    std::string_view v = line;
    while (!v.empty() && (v.back() == '\n' || v.back() == '\r')) v.remove_suffix(1);
    if (v.empty()) continue;
    record = parse_delta_line(v, line_no_);
    return true;
  }
  return false;
}

struct CorpusWriter::Handle {
  std::unique_ptr<AtomicFile> file;
  gzFile gz = nullptr;
  ~Handle() {
    if (gz) gzclose(gz);
  }
};

CorpusWriter::CorpusWriter(const std::filesystem::path& path)
    : handle_(std::make_unique<Handle>()) {
  handle_->file = std::make_unique<AtomicFile>(path);
  if (path.extension() == ".gz") {
    handle_->gz = gzopen(handle_->file->temp_path().c_str(), "wb6");
    if (!handle_->gz)
      throw IoError("cannot open " + handle_->file->temp_path().string());
  } else {
    handle_->file->stream();
  }
}

CorpusWriter::~CorpusWriter() = default;

void CorpusWriter::write(const DeltaRecord& record) {
  std::string line = format_delta_line(record);
  line += '\n';
  if (handle_->gz) {
    const int n = gzwrite(handle_->gz, line.data(), static_cast<unsigned>(line.size()));
    if (n != static_cast<int>(line.size())) throw IoError("gzip write failed");
  } else {
    handle_->file->stream() << line;
  }
  ++written_;
}

void CorpusWriter::commit() {
  if (handle_->gz) {
    const int rc = gzclose(handle_->gz);
    handle_->gz = nullptr;
    if (rc != Z_OK) throw IoError("gzip close failed");
  }
  handle_->file->commit();
}

std::vector<DeltaRecord> read_corpus(const std::filesystem::path& path) {
  std::vector<DeltaRecord> out;
  for_each_record(path, [&](DeltaRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

void write_corpus(std::span<const DeltaRecord> records,
                  const std::filesystem::path& path) {
  CorpusWriter writer(path);
  for (const auto& r : records) writer.write(r);
  writer.commit();
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(DeltaRecord&&)>& fn) {
  CorpusReader reader(path);
  DeltaRecord rec;
  while (reader.next(rec)) fn(std::move(rec));
}

// ---------------------------------------------------------------------------
// Aliases

AliasMap AliasMap::parse(std::string_view tsv) {
  AliasMap m;
  std::size_t line_no = 0;
  while (!tsv.empty()) {
    const auto nl = tsv.find('\n');
    std::string_view line = tsv.substr(0, nl);
    tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw CorpusError("BadAliasLine",
                        fmt::format("alias line {}: expected raw<TAB>canonical",
                                    line_no),
                        line_no);
    }
    std::string raw(line.substr(0, tab));
    std::string canon(line.substr(tab + 1));
    auto [it, inserted] = m.map_.emplace(raw, canon);
    if (!inserted && it->second != canon) {
      throw CorpusError("BadAliasLine",
                        fmt::format("alias line {}: '{}' mapped twice", line_no, raw),
                        line_no);
    }
  }
  m.finalize();
  return m;
}

AliasMap AliasMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open alias map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

AliasMap AliasMap::from_pairs(
    std::span<const std::pair<std::string, std::string>> pairs) {
  AliasMap m;
  for (const auto& [raw, canon] : pairs) m.map_[raw] = canon;
  m.finalize();
  return m;
}

void AliasMap::finalize() {
  std::unordered_map<std::string, std::string> resolved;
  for (const auto& [raw, first] : map_) {
    std::string cur = first;
    std::unordered_set<std::string> visited{raw};
    while (true) {
      auto it = map_.find(cur);
      if (it == map_.end() || it->second == cur) break;
      if (!visited.insert(cur).second) {
        throw CorpusError("AliasCycle", "alias cycle through '" + raw + "'");
      }
      cur = it->second;
    }
    if (cur != raw) resolved.emplace(raw, cur);
  }
  map_ = std::move(resolved);
}

const std::string& AliasMap::resolve(const std::string& id) const {
  auto it = map_.find(id);
  return it == map_.end() ? id : it->second;
}

void apply_aliases(DeltaRecord& r, const AliasMap& dev_map,
                   const AliasMap& proj_map) {
  if (!dev_map.empty()) r.developer = dev_map.resolve(r.developer);
  if (!proj_map.empty()) r.project = proj_map.resolve(r.project);
}

void apply_aliases(std::span<DeltaRecord> records, const AliasMap& dev_map,
                   const AliasMap& proj_map) {
  for (auto& r : records) apply_aliases(r, dev_map, proj_map);
}

// ---------------------------------------------------------------------------
// Filtering

void FilterConfig::validate() const {
  if (min_commits <= 0 || min_commits > max_commits) {
    throw ConfigError(fmt::format("need 0 < min_commits <= max_commits (got {}, {})",
                                  min_commits, max_commits));
  }
  if (max_apis_per_delta < 1) throw ConfigError("max_apis_per_delta must be >= 1");
}

Table FilterReport::to_table() const {
  Table t({"rule", "count"});
  auto row = [&](const char* name, std::size_t v) {
    t.add_row({name, std::to_string(v)});
  };
  row("input_deltas", input_deltas);
  row("developers_seen", developers_seen);
  row("developers_below_min_commits", developers_below_min);
  row("developers_above_max_commits", developers_above_max);
  row("deltas_removed_commit_bounds", deltas_removed_commit_bounds);
  row("deltas_dropped_oversize", deltas_dropped_oversize);
  row("deltas_truncated_oversize", deltas_truncated);
  row("output_deltas", output_deltas);
  return t;
}

std::string FilterReport::to_text() const {
  return fmt::format(
      "filter: {} deltas in, {} out\n"
      "  developers: {} seen, {} below min commits, {} above max commits\n"
      "  deltas removed with their developer: {}\n"
      "  oversized deltas: {} dropped, {} truncated\n",
      input_deltas, output_deltas, developers_seen, developers_below_min,
      developers_above_max, deltas_removed_commit_bounds,
      deltas_dropped_oversize, deltas_truncated);
}

CorpusFilter::CorpusFilter(FilterConfig cfg, DeveloperCounts counts)
    : cfg_(cfg), counts_(std::move(counts)) {
  cfg_.validate();
  report_.developers_seen = counts_.size();
  for (const auto& [dev, n] : counts_) {
    if (n < cfg_.min_commits) ++report_.developers_below_min;
    if (n > cfg_.max_commits) ++report_.developers_above_max;
  }
}

std::optional<DeltaRecord> CorpusFilter::apply(DeltaRecord record) {
  ++report_.input_deltas;
  auto it = counts_.find(record.developer);
  const std::int64_t n = it == counts_.end() ? 0 : it->second;
  if (n < cfg_.min_commits || n > cfg_.max_commits) {
    ++report_.deltas_removed_commit_bounds;
    return std::nullopt;
  }
  if (record.apis.size() > cfg_.max_apis_per_delta) {
    if (cfg_.oversize == OversizePolicy::kDrop) {
      ++report_.deltas_dropped_oversize;
      return std::nullopt;
    }
    record.apis.resize(cfg_.max_apis_per_delta);
    ++report_.deltas_truncated;
  }
  ++report_.output_deltas;
  return record;
}

FilterReport CorpusFilter::report() const { return report_; }

DeveloperCounts count_developers(std::span<const DeltaRecord> records) {
  DeveloperCounts counts;
  for (const auto& r : records) ++counts[r.developer];
  return counts;
}

FilterResult filter_corpus(std::vector<DeltaRecord> records,
                           const FilterConfig& cfg) {
  CorpusFilter filter(cfg, count_developers(records));
  FilterResult result;
  for (auto& r : records)
    if (auto kept = filter.apply(std::move(r))) result.records.push_back(std::move(*kept));
  result.report = filter.report();
  return result;
}

TimeSplit time_split(std::vector<DeltaRecord> records, std::int64_t cutoff) {
  TimeSplit split;
  for (auto& r : records) {
    (r.timestamp < cutoff ? split.train : split.test).push_back(std::move(r));
  }
  return split;
}

std::vector<DeltaRecord> sample_projects(std::vector<DeltaRecord> records,
                                         std::size_t n_projects,
                                         std::uint64_t seed) {
  std::set<std::string> distinct;
  for (const auto& r : records) distinct.insert(r.project);
  const std::vector<std::string> projects(distinct.begin(), distinct.end());
  Rng rng(seed);
  std::unordered_set<std::string> keep;
  for (auto idx : rng.sample_indices(projects.size(), n_projects))
    keep.insert(projects[idx]);
  std::erase_if(records, [&](const DeltaRecord& r) { return !keep.contains(r.project); });
  return records;
}

// ---------------------------------------------------------------------------
// Statistics

struct StatsAccumulator::Group {
  std::size_t deltas = 0;
  std::size_t small = 0;
  std::size_t max_apis = 0;
  std::unordered_set<std::string> authors;
  std::unordered_set<std::string> projects;
  std::unordered_set<std::string> apis;

  void add(const DeltaRecord& r, std::size_t threshold) {
    ++deltas;
    std::unordered_set<std::string_view> distinct(r.apis.begin(), r.apis.end());
    if (distinct.size() <= threshold) ++small;
    max_apis = std::max(max_apis, distinct.size());
    authors.insert(r.developer);
    projects.insert(r.project);
    for (const auto& a : r.apis) apis.insert(a);
  }

  CorpusStats stats() const {
    CorpusStats s;
    s.deltas = deltas;
    s.authors = authors.size();
    s.projects = projects.size();
    s.distinct_apis = apis.size();
    s.fraction_small =
        deltas == 0 ? 1.0 : static_cast<double>(small) / static_cast<double>(deltas);
    s.max_apis = max_apis;
    return s;
  }
};

void StatsAccumulator::add(const DeltaRecord& record) {
  auto& group = groups_[record.language];
  if (!group) group = std::make_shared<Group>();
  group->add(record, threshold_);
  if (!total_) total_ = std::make_shared<Group>();
  total_->add(record, threshold_);
}

CorpusSummary StatsAccumulator::finish() const {
  CorpusSummary summary;
  for (const auto& [lang, group] : groups_) summary.per_language[lang] = group->stats();
  summary.total = total_ ? total_->stats() : CorpusStats{};
  return summary;
}

CorpusSummary corpus_stats(std::span<const DeltaRecord> records,
                           std::size_t small_threshold) {
  StatsAccumulator acc(small_threshold);
  for (const auto& r : records) acc.add(r);
  return acc.finish();
}

Table CorpusSummary::to_table() const {
  Table t({"language", "deltas", "authors", "projects", "distinct_apis",
           "fraction_small", "max_apis"});
  auto row = [&](const std::string& name, const CorpusStats& s) {
    t.add_row({name, std::to_string(s.deltas), std::to_string(s.authors),
               std::to_string(s.projects), std::to_string(s.distinct_apis),
               fmt::format("{:.4f}", s.fraction_small), std::to_string(s.max_apis)});
  };
  for (const auto& [lang, s] : per_language) row(lang, s);
  row("ALL", total);
  return t;
}

}  // namespace skillspace::corpus
