#include "skillspace/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "skillspace/rng.hpp"

namespace skillspace::eval {

namespace {

using embed::TagKind;
using model::EntityKind;
using model::EntityRef;

std::string_view aggregation_name(query::Aggregation a) {
  return a == query::Aggregation::kCentroid ? "centroid" : "mean_of_cosines";
}

void check_leakage(const EmbeddingModel& model, std::span<const DeltaRecord> train,
                   std::span<const DeltaRecord> test, std::int64_t cutoff) {
  if (model.max_train_timestamp >= cutoff) {
    throw EvalError("LeakageDetected",
                    fmt::format("model saw timestamp {} >= cutoff {}",
                                model.max_train_timestamp, cutoff));
  }
  for (const auto& r : train) {
    if (r.timestamp >= cutoff)
      throw EvalError("LeakageDetected",
                      fmt::format("training delta at {} >= cutoff {}", r.timestamp, cutoff));
  }
  for (const auto& r : test) {
    if (r.timestamp < cutoff)
      throw EvalError("LeakageDetected",
                      fmt::format("test delta at {} < cutoff {}", r.timestamp, cutoff));
  }
}

void base_meta(ReportMeta& meta, const std::string& hypothesis, const EvalConfig& cfg,
               const EmbeddingModel& model) {
  meta.set("hypothesis", hypothesis);
  meta.set("cutoff", std::to_string(cfg.cutoff));
  meta.set("seed", std::to_string(cfg.seed));
  meta.set("n_random", cfg.n_random);
  meta.set("aggregation", std::string(aggregation_name(cfg.aggregation)));
  meta.set("model_max_train_timestamp", std::to_string(model.max_train_timestamp));
  meta.set("model_dim", model.dim());
}

std::span<const float> tag_row(const EmbeddingModel& model, std::uint32_t idx) {
  return model.tag.row(idx);
}

// Cosine that reports degenerate rows as nullopt instead of throwing.
std::optional<double> safe_cosine(std::span<const float> a, std::span<const float> b) {
  try {
    return query::cosine(a, b);
  } catch (const query::QueryError&) {
    return std::nullopt;
  }
}

template <typename T>
std::vector<T> draw(Rng& rng, const std::vector<T>& pool, std::size_t k) {
  std::vector<T> out;
  for (auto i : rng.sample_indices(pool.size(), k)) out.push_back(pool[i]);
  return out;
}

template <typename T>
void assert_disjoint(const std::vector<T>& factual, const std::vector<T>& controls,
                     const std::string& subject) {
  std::set<T> f(factual.begin(), factual.end());
  for (const auto& c : controls) {
    if (f.count(c))
      throw EvalError("ControlOverlap", "control sample intersects factual set for " + subject);
  }
}

struct Group {
  std::size_t subjects = 0;
  std::vector<double> factual;
  std::vector<double> control;
};

TTestRow finish_group(const std::string& name, const Group& g, bool paired,
                      const char* empty_error) {
  TTestRow row;
  row.group = name;
  row.subjects = g.subjects;
  if (!g.factual.empty()) row.mean_factual = stats::mean(g.factual);
  if (!g.control.empty()) row.mean_control = stats::mean(g.control);
  if (g.factual.size() < 2 || g.control.size() < 2) {
    row.error = empty_error;
    return row;
  }
  try {
    row.result = paired ? stats::paired_t_test(g.factual, g.control)
                        : stats::welch_t_test(g.factual, g.control);
  } catch (const stats::StatsError& e) {
    row.error = e.kind();
  }
  return row;
}

void finish_rows(TTestReport& report, const std::map<std::string, Group>& groups,
                 bool paired, const char* empty_error) {
  for (const auto& [name, g] : groups) report.rows.push_back(finish_group(name, g, paired, empty_error));
  if (report.rows.empty()) {
    TTestRow row;
    row.group = "ALL";
    row.error = empty_error;
    report.rows.push_back(row);
  }
}

std::string dominant(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t n = 0;
  for (const auto& [k, c] : counts) {
    if (c > n) {
      best = k;
      n = c;
    }
  }
  return best;
}

double parse_number(const std::string& cell, std::size_t line, const char* column,
                    const char* kind) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw EvalError(kind, fmt::format("line {}: column {} is not a number: '{}'", line,
                                      column, cell));
  }
  return v;
}

std::string table_block(const ReportMeta& meta, const Table& table) {
  return meta.to_comment_block() + table.to_csv();
}

}  // namespace

void EvalConfig::validate() const {
  if (n_random < 1) throw ConfigError("n_random must be >= 1");
  if (survey_controls < 1) throw ConfigError("survey_controls must be >= 1");
  if (cutoff < 0) throw ConfigError("cutoff must be >= 0");
}

void ReportMeta::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

std::optional<std::string> ReportMeta::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

std::string ReportMeta::to_comment_block() const {
  std::string out;
  for (const auto& [k, v] : entries) out += "# " + k + ": " + v + "\n";
  return out;
}

const TTestRow* TTestReport::find(const std::string& group) const {
  for (const auto& r : rows)
    if (r.group == group) return &r;
  return nullptr;
}

Table TTestReport::to_table() const {
  Table t({"group", "subjects", "n_factual", "n_control", "mean_factual", "mean_control",
           "mean_diff", "ci_low", "ci_high", "t", "df", "p_value", "error"});
  for (const auto& r : rows) {
    if (r.result) {
      const auto& x = *r.result;
      t.add_row({r.group, std::to_string(r.subjects), std::to_string(x.n_x),
                 std::to_string(x.n_y), format_double(r.mean_factual),
                 format_double(r.mean_control), format_double(x.mean_diff),
                 format_double(x.ci_low), format_double(x.ci_high), format_double(x.t_stat),
                 format_double(x.df), format_double(x.p_value), ""});
    } else {
      t.add_row({r.group, std::to_string(r.subjects), "", "", format_double(r.mean_factual),
                 format_double(r.mean_control), "", "", "", "", "", "", r.error});
    }
  }
  return t;
}

std::string TTestReport::to_csv() const { return table_block(meta, to_table()); }

std::string TTestReport::to_text() const {
  Table t({"Group", "N", "Diff", "95% CI", "t", "p-Value"});
  for (const auto& r : rows) {
    if (r.result) {
      const auto& x = *r.result;
      t.add_row({r.group, std::to_string(r.subjects), format_sig(x.mean_diff, 3),
                 fmt::format("[{}, {}]", format_sig(x.ci_low, 3), format_sig(x.ci_high, 3)),
                 format_sig(x.t_stat, 4),
                 x.p_value < 2e-16 ? std::string("< 2e-16") : format_sig(x.p_value, 3)});
    } else {
      t.add_row({r.group, std::to_string(r.subjects), "", "", "", r.error});
    }
  }
  return fmt::format("{} ({} t-test)\n", hypothesis, test) + t.to_text() +
         meta.to_comment_block();
}

std::string RegressionReport::to_csv() const {
  ReportMeta m = meta;
  for (std::size_t i = 0; i < warnings.size(); ++i) m.set(fmt::format("warning_{}", i), warnings[i]);
  return table_block(m, result.to_table());
}

std::string RegressionReport::to_text() const {
  std::string out = hypothesis + "\n" + result.to_text();
  for (const auto& w : warnings) out += "warning: " + w + "\n";
  return out + meta.to_comment_block();
}

// ---------------------------------------------------------------------------

TTestReport eval_new_apis(const EmbeddingModel& model, std::span<const DeltaRecord> train,
                          std::span<const DeltaRecord> test, const EvalConfig& cfg) {
  cfg.validate();
  check_leakage(model, train, test, cfg.cutoff);
  const bool per_language = cfg.per_language.value_or(true);

  std::map<std::string, std::set<std::string>> history;
  for (const auto& r : train) history[r.developer].insert(r.apis.begin(), r.apis.end());
  auto everything = history;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> test_apis;
  for (const auto& r : test) {
    auto& list = test_apis[{r.developer, r.language}];
    for (const auto& a : r.apis)
      if (std::find(list.begin(), list.end(), a) == list.end()) list.push_back(a);
    everything[r.developer].insert(r.apis.begin(), r.apis.end());
  }

  std::map<std::string, std::vector<std::uint32_t>> pools;
  auto pool_for = [&](const std::string& lang) -> const std::vector<std::uint32_t>& {
    auto it = pools.find(lang);
    if (it != pools.end()) return it->second;
    std::vector<std::uint32_t> ids;
    if (auto tag = model.tags.find(TagKind::kLanguage, lang)) {
      for (std::uint32_t v = 0; v < model.vocab.size(); ++v) {
        const auto& langs = model.token_languages[v];
        if (std::binary_search(langs.begin(), langs.end(), *tag)) ids.push_back(v);
      }
    }
    return pools.emplace(lang, std::move(ids)).first->second;
  };

  Rng rng(cfg.seed);
  std::map<std::string, Group> groups;
  std::size_t no_vector = 0, no_new = 0, no_controls = 0, short_controls = 0, degenerate = 0;
  std::set<std::string> developers;
  for (const auto& [key, apis] : test_apis) {
    const auto& [dev, lang] = key;
    developers.insert(dev);
    if (!model.tags.find(TagKind::kDeveloper, dev)) {
      ++no_vector;
      continue;
    }
    const auto& seen = history[dev];
    std::vector<std::string> factual;
    for (const auto& a : apis)
      if (!seen.count(a) && model.vocab.find(a)) factual.push_back(a);
    if (factual.empty()) {
      ++no_new;
      continue;
    }
    const auto& all = everything[dev];
    std::vector<std::string> pool;
    for (auto v : pool_for(lang))
      if (!all.count(model.vocab.token(v))) pool.push_back(model.vocab.token(v));
    if (pool.empty()) {
      ++no_controls;
      continue;
    }
    const std::size_t want = factual.size() * cfg.n_random;
    if (pool.size() < want) ++short_controls;
    auto controls = draw(rng, pool, want);
    assert_disjoint(factual, controls, dev + "/" + lang);

    const EntityRef ref{EntityKind::kDeveloper, dev};
    double af = 0.0, ac = 0.0;
    try {
      af = query::align_to_apis(model, ref, factual, cfg.aggregation).value;
      ac = query::align_to_apis(model, ref, controls, cfg.aggregation).value;
    } catch (const query::QueryError&) {
      ++degenerate;
      continue;
    }
    auto& g = groups[per_language ? lang : std::string("ALL")];
    ++g.subjects;
    g.factual.push_back(af);
    g.control.push_back(ac);
  }

  TTestReport report;
  report.hypothesis = "H1 new APIs";
  report.test = "paired";
  base_meta(report.meta, "H1", cfg, model);
  report.meta.set("test", "paired");
  report.meta.set("granularity", per_language ? "per_language" : "pooled");
  report.meta.set("subjects", "developer x language");
  report.meta.set("developers_with_test_activity", developers.size());
  report.meta.set("excluded_no_vector", no_vector);
  report.meta.set("excluded_no_new_apis", no_new);
  report.meta.set("excluded_no_controls", no_controls);
  report.meta.set("excluded_degenerate", degenerate);
  report.meta.set("short_control_samples", short_controls);
  finish_rows(report, groups, true, "NoEligibleDevelopers");
  return report;
}

TTestReport eval_new_projects(const EmbeddingModel& model,
                              std::span<const DeltaRecord> train,
                              std::span<const DeltaRecord> test, const EvalConfig& cfg) {
  cfg.validate();
  check_leakage(model, train, test, cfg.cutoff);
  const bool per_language = cfg.per_language.value_or(false);

  std::map<std::string, std::set<std::string>> joined;  // train projects per dev
  std::map<std::string, std::set<std::string>> project_langs;
  for (const auto& r : train) {
    joined[r.developer].insert(r.project);
    project_langs[r.project].insert(r.language);
  }
  auto touched = joined;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> test_projects;
  for (const auto& r : test) {
    test_projects[{r.developer, r.language}].insert(r.project);
    touched[r.developer].insert(r.project);
  }

  std::map<std::string, std::vector<std::string>> pools;
  for (const auto& [proj, langs] : project_langs) {
    if (!model.tags.find(TagKind::kProject, proj)) continue;
    for (const auto& l : langs) pools[l].push_back(proj);
  }

  Rng rng(cfg.seed);
  std::map<std::string, Group> groups;
  std::size_t no_vector = 0, no_new = 0, no_controls = 0, short_controls = 0, degenerate = 0;
  for (const auto& [key, projects] : test_projects) {
    const auto& [dev, lang] = key;
    const auto dev_tag = model.tags.find(TagKind::kDeveloper, dev);
    if (!dev_tag) {
      ++no_vector;
      continue;
    }
    const auto& before = joined[dev];
    std::vector<std::string> factual;
    for (const auto& p : projects)
      if (!before.count(p) && model.tags.find(TagKind::kProject, p)) factual.push_back(p);
    if (factual.empty()) {
      ++no_new;
      continue;
    }
    std::vector<std::string> pool;
    if (auto it = pools.find(lang); it != pools.end())
      for (const auto& p : it->second)
        if (!touched[dev].count(p)) pool.push_back(p);
    if (pool.empty()) {
      ++no_controls;
      continue;
    }
    const std::size_t want = factual.size() * cfg.n_random;
    if (pool.size() < want) ++short_controls;
    auto controls = draw(rng, pool, want);
    assert_disjoint(factual, controls, dev + "/" + lang);

    const auto dv = tag_row(model, *dev_tag);
    std::vector<double> fv, cv;
    bool bad = false;
    for (const auto& p : factual) {
      auto c = safe_cosine(dv, tag_row(model, *model.tags.find(TagKind::kProject, p)));
      if (!c) bad = true; else fv.push_back(*c);
    }
    for (const auto& p : controls) {
      auto c = safe_cosine(dv, tag_row(model, *model.tags.find(TagKind::kProject, p)));
      if (!c) bad = true; else cv.push_back(*c);
    }
    if (bad) {
      ++degenerate;
      continue;
    }
    auto& g = groups[per_language ? lang : std::string("ALL")];
    ++g.subjects;
    g.factual.insert(g.factual.end(), fv.begin(), fv.end());
    g.control.insert(g.control.end(), cv.begin(), cv.end());
  }

  TTestReport report;
  report.hypothesis = "H2 new projects";
  report.test = "welch";
  base_meta(report.meta, "H2", cfg, model);
  report.meta.set("test", "welch");
  report.meta.set("granularity", per_language ? "per_language" : "pooled");
  report.meta.set("subjects", "developer x language");
  report.meta.set("excluded_no_vector", no_vector);
  report.meta.set("excluded_no_new_projects", no_new);
  report.meta.set("excluded_no_controls", no_controls);
  report.meta.set("excluded_degenerate", degenerate);
  report.meta.set("short_control_samples", short_controls);
  finish_rows(report, groups, false, "NoEligibleDevelopers");
  return report;
}

TTestReport eval_new_contributors(const EmbeddingModel& model,
                                  std::span<const DeltaRecord> train,
                                  std::span<const DeltaRecord> test,
                                  const EvalConfig& cfg) {
  cfg.validate();
  check_leakage(model, train, test, cfg.cutoff);
  const bool per_language = cfg.per_language.value_or(false);

  std::map<std::string, std::set<std::string>> before;
  std::map<std::string, std::map<std::string, std::size_t>> lang_counts;
  for (const auto& r : train) {
    before[r.project].insert(r.developer);
    ++lang_counts[r.project][r.language];
  }
  auto contributed = before;
  std::map<std::string, std::set<std::string>> newcomers_raw;
  for (const auto& r : test) {
    newcomers_raw[r.project].insert(r.developer);
    contributed[r.project].insert(r.developer);
  }

  std::vector<std::string> dev_pool;
  for (const auto& e : model.tags.entries())
    if (e.kind == TagKind::kDeveloper) dev_pool.push_back(e.id);

  Rng rng(cfg.seed);
  std::map<std::string, Group> groups;
  std::size_t no_vector = 0, no_new = 0, no_controls = 0, short_controls = 0, degenerate = 0;
  for (const auto& [proj, devs] : newcomers_raw) {
    const auto proj_tag = model.tags.find(TagKind::kProject, proj);
    if (!proj_tag) {
      ++no_vector;
      continue;
    }
    std::vector<std::string> factual;
    for (const auto& d : devs)
      if (!before[proj].count(d) && model.tags.find(TagKind::kDeveloper, d)) factual.push_back(d);
    if (factual.empty()) {
      ++no_new;
      continue;
    }
    std::vector<std::string> pool;
    for (const auto& d : dev_pool)
      if (!contributed[proj].count(d)) pool.push_back(d);
    if (pool.empty()) {
      ++no_controls;
      continue;
    }
    const std::size_t want = factual.size() * cfg.n_random;
    if (pool.size() < want) ++short_controls;
    auto controls = draw(rng, pool, want);
    assert_disjoint(factual, controls, proj);

    const auto pv = tag_row(model, *proj_tag);
    std::vector<double> fv, cv;
    bool bad = false;
    for (const auto& d : factual) {
      auto c = safe_cosine(pv, tag_row(model, *model.tags.find(TagKind::kDeveloper, d)));
      if (!c) bad = true; else fv.push_back(*c);
    }
    for (const auto& d : controls) {
      auto c = safe_cosine(pv, tag_row(model, *model.tags.find(TagKind::kDeveloper, d)));
      if (!c) bad = true; else cv.push_back(*c);
    }
    if (bad) {
      ++degenerate;
      continue;
    }
    auto& g = groups[per_language ? dominant(lang_counts[proj]) : std::string("ALL")];
    ++g.subjects;
    g.factual.insert(g.factual.end(), fv.begin(), fv.end());
    g.control.insert(g.control.end(), cv.begin(), cv.end());
  }

  TTestReport report;
  report.hypothesis = "H3 new contributors";
  report.test = "welch";
  base_meta(report.meta, "H3", cfg, model);
  report.meta.set("test", "welch");
  report.meta.set("granularity", per_language ? "per_language" : "pooled");
  report.meta.set("subjects", "project");
  report.meta.set("excluded_no_vector", no_vector);
  report.meta.set("excluded_no_new_contributors", no_new);
  report.meta.set("excluded_no_controls", no_controls);
  report.meta.set("excluded_degenerate", degenerate);
  report.meta.set("short_control_samples", short_controls);
  finish_rows(report, groups, false, "NoEligibleProjects");
  return report;
}

// ---------------------------------------------------------------------------

const std::array<const char*, PrRecord::kControls>& PrRecord::control_names() {
  static const std::array<const char*, kControls> names = {
      "creator_submitted", "creator_accepted",   "repo_submitted",
      "repo_accepted",     "dependency",         "age",
      "comments",          "review_comments",    "commits",
      "additions",         "deletions",          "changed_files",
      "contain_issue_fix", "user_accepted_repo", "creator_total_commits",
      "creator_total_projects", "contain_test_code"};
  return names;
}

bool PrRecord::is_binary_control(std::size_t index) {
  return index == 4 || index == 12 || index == 13 || index == 16;
}

std::vector<PrRecord> parse_pr_csv(const CsvFile& csv) {
  const auto c_dev = csv.require_column("developer");
  const auto c_proj = csv.require_column("project");
  const auto c_acc = csv.require_column("accepted");
  std::array<std::size_t, PrRecord::kControls> cols{};
  for (std::size_t j = 0; j < PrRecord::kControls; ++j)
    cols[j] = csv.require_column(PrRecord::control_names()[j]);

  std::vector<PrRecord> out;
  out.reserve(csv.size());
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const auto line = csv.line_of(i);
    PrRecord r;
    r.developer = csv.cell(i, c_dev);
    r.project = csv.cell(i, c_proj);
    if (r.developer.empty() || r.project.empty())
      throw EvalError("BadPrRecord", fmt::format("line {}: empty developer or project", line));
    const double acc = parse_number(csv.cell(i, c_acc), line, "accepted", "BadPrRecord");
    if (acc != 0.0 && acc != 1.0)
      throw EvalError("BadPrRecord", fmt::format("line {}: accepted must be 0 or 1", line));
    r.accepted = static_cast<int>(acc);
    for (std::size_t j = 0; j < PrRecord::kControls; ++j) {
      const char* name = PrRecord::control_names()[j];
      const double v = parse_number(csv.cell(i, cols[j]), line, name, "BadPrRecord");
      if (PrRecord::is_binary_control(j) ? (v != 0.0 && v != 1.0) : v < 0.0) {
        throw EvalError("BadPrRecord", fmt::format("line {}: {} out of range: {}", line, name,
                                                   csv.cell(i, cols[j])));
      }
      r.controls[j] = v;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PrRecord> read_pr_csv(const std::filesystem::path& path) {
  return parse_pr_csv(CsvFile::read(path));
}

RegressionReport eval_pr_acceptance(const EmbeddingModel& model,
                                    std::span<const PrRecord> prs, const EvalConfig& cfg) {
  cfg.validate();
  if (model.max_train_timestamp >= cfg.cutoff) {
    throw EvalError("LeakageDetected",
                    fmt::format("model saw timestamp {} >= cutoff {}",
                                model.max_train_timestamp, cfg.cutoff));
  }

  std::vector<double> sim, y;
  std::vector<std::array<double, PrRecord::kControls>> ctl;
  for (const auto& pr : prs) {
    auto d = model.tags.find(TagKind::kDeveloper, pr.developer);
    auto p = model.tags.find(TagKind::kProject, pr.project);
    if (!d || !p) continue;
    auto c = safe_cosine(tag_row(model, *d), tag_row(model, *p));
    if (!c) continue;
    sim.push_back(*c);
    y.push_back(pr.accepted);
    ctl.push_back(pr.controls);
  }
  const std::size_t dropped = prs.size() - y.size();

  RegressionReport report;
  report.hypothesis = "H4 PR acceptance (logistic)";
  base_meta(report.meta, "H4", cfg, model);
  report.meta.set("records", prs.size());
  report.meta.set("excluded_unresolved", dropped);
  report.meta.set("count_scaling", "log1p then standardized");
  report.meta.set("binary_scaling", "raw 0/1");
  report.meta.set("similarity_scaling", "raw cosine");
  if (y.empty())
    throw EvalError("NoResolvableRecords", "no PR has both a developer and a project vector");
  if (dropped * 2 > prs.size()) {
    report.warnings.push_back(fmt::format("UnresolvableRate: {} of {} PRs dropped", dropped,
                                          prs.size()));
  }

  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  columns.emplace_back(y.size(), 1.0);
  names.emplace_back("(Intercept)");
  columns.push_back(sim);
  names.emplace_back("similarity");
  std::string dropped_constant;
  for (std::size_t j = 0; j < PrRecord::kControls; ++j) {
    std::vector<double> col(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) col[i] = ctl[i][j];
    const bool binary = PrRecord::is_binary_control(j);
    if (!binary)
      for (auto& v : col) v = std::log1p(v);
    const double var = stats::sample_variance(col);
    if (!(var > 0.0)) {
      if (!dropped_constant.empty()) dropped_constant += ",";
      dropped_constant += PrRecord::control_names()[j];
      continue;
    }
    if (!binary) {
      const double m = stats::mean(col);
      const double sd = std::sqrt(var);
      for (auto& v : col) v = (v - m) / sd;
    }
    columns.push_back(std::move(col));
    names.emplace_back(PrRecord::control_names()[j]);
  }
  if (!dropped_constant.empty()) report.meta.set("dropped_constant_controls", dropped_constant);

  const auto X = stats::design_from_columns(columns);
  report.result = stats::logistic_regression(X, y, names);

  const std::span<const std::vector<double>> predictors(columns.begin() + 1, columns.end());
  const auto Xp = stats::design_from_columns(predictors);
  const std::span<const std::string> pnames(names.begin() + 1, names.end());
  auto v = stats::vif(Xp, pnames);
  report.result.vif.assign(1, stats::RegressionResult::kNaN);
  report.result.vif.insert(report.result.vif.end(), v.begin(), v.end());
  return report;
}

// ---------------------------------------------------------------------------

std::vector<SurveyRecord> parse_survey_csv(const CsvFile& csv) {
  const auto c_dev = csv.require_column("developer");
  const auto c_api = csv.require_column("api");
  const auto c_score = csv.require_column("score");
  const auto c_commits = csv.require_column("commits");
  std::vector<SurveyRecord> out;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const auto line = csv.line_of(i);
    SurveyRecord r;
    r.developer = csv.cell(i, c_dev);
    r.api = csv.cell(i, c_api);
    if (r.developer.empty())
      throw EvalError("BadSurveyRecord", fmt::format("line {}: empty developer", line));
    if (std::find(kSurveyApis.begin(), kSurveyApis.end(), r.api) == kSurveyApis.end())
      throw EvalError("BadSurveyRecord", fmt::format("line {}: unknown api '{}'", line, r.api));
    const double s = parse_number(csv.cell(i, c_score), line, "score", "BadSurveyRecord");
    if (s != std::floor(s) || s < 1 || s > 5)
      throw EvalError("BadSurveyRecord",
                      fmt::format("line {}: score must be an integer in [1,5]", line));
    r.score = static_cast<int>(s);
    r.commits = parse_number(csv.cell(i, c_commits), line, "commits", "BadSurveyRecord");
    if (r.commits < 0)
      throw EvalError("BadSurveyRecord", fmt::format("line {}: negative commits", line));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurveyRecord> read_survey_csv(const std::filesystem::path& path) {
  return parse_survey_csv(CsvFile::read(path));
}

std::string SurveyReport::to_csv() const {
  Table t({"model", "predictor", "estimate", "std_error", "statistic", "p_value"});
  auto add = [&](const char* label, const stats::RegressionResult& r) {
    for (const auto& c : r.coefficients)
      t.add_row({label, c.name, format_double(c.estimate), format_double(c.std_error),
                 format_double(c.statistic), format_double(c.p_value)});
  };
  add("A", alignment_model);
  add("B", score_model);
  const auto& d = declared_vs_control;
  t.add_row({"declared_vs_control", "mean_diff", format_double(d.mean_diff), "",
             format_double(d.t_stat), format_double(d.p_value)});
  return table_block(meta, t);
}

std::string SurveyReport::to_text() const {
  std::string out = "H5 (A) explaining developer-API alignment\n" + alignment_model.to_text();
  out += "\nH5 (B) explaining self-reported score\n" + score_model.to_text();
  const auto& d = declared_vs_control;
  out += fmt::format("\ndeclared vs control alignment: diff {} [{}, {}], t = {}, p = {}\n",
                     format_sig(d.mean_diff, 3), format_sig(d.ci_low, 3),
                     format_sig(d.ci_high, 3), format_sig(d.t_stat, 4),
                     format_sig(d.p_value, 3));
  return out + meta.to_comment_block();
}

SurveyReport eval_self_reported(const EmbeddingModel& model,
                                std::span<const SurveyRecord> survey,
                                const EvalConfig& cfg) {
  cfg.validate();
  auto api_id = [&](const std::string& api) -> std::optional<std::uint32_t> {
    if (auto id = model.vocab.find(api)) return id;
    if (api == "socketio") return model.vocab.find("socket.io");
    return std::nullopt;
  };

  std::set<std::uint32_t> survey_ids;
  for (const char* a : kSurveyApis)
    if (auto id = api_id(a)) survey_ids.insert(*id);
  if (auto id = model.vocab.find("socket.io")) survey_ids.insert(*id);
  std::vector<std::uint32_t> pool;
  for (std::uint32_t v = 0; v < model.vocab.size(); ++v)
    if (!survey_ids.count(v)) pool.push_back(v);

  Rng rng(cfg.seed);
  std::vector<std::size_t> level;
  std::vector<double> log_commits, score, align, control;
  std::size_t unresolved = 0, no_commits = 0, degenerate = 0;
  for (const auto& r : survey) {
    auto d = model.tags.find(TagKind::kDeveloper, r.developer);
    auto a = api_id(r.api);
    if (!d || !a) {
      ++unresolved;
      continue;
    }
    if (!(r.commits > 0)) {
      ++no_commits;
      continue;
    }
    if (pool.empty()) throw EvalError("NoControlApis", "vocabulary has no control APIs");
    const auto dv = tag_row(model, *d);
    auto c = safe_cosine(dv, model.input.row(*a));
    std::vector<double> cs;
    for (auto v : draw(rng, pool, cfg.survey_controls)) {
      if (auto x = safe_cosine(dv, model.input.row(v))) cs.push_back(*x);
    }
    if (!c || cs.empty()) {
      ++degenerate;
      continue;
    }
    level.push_back(static_cast<std::size_t>(
        std::find(kSurveyApis.begin(), kSurveyApis.end(), r.api) - kSurveyApis.begin()));
    log_commits.push_back(std::log(r.commits));
    score.push_back(r.score);
    align.push_back(*c);
    control.push_back(stats::mean(cs));
  }

  SurveyReport report;
  base_meta(report.meta, "H5", cfg, model);
  report.meta.set("survey_controls", cfg.survey_controls);
  report.meta.set("records", survey.size());
  report.meta.set("excluded_unresolved", unresolved);
  report.meta.set("excluded_nonpositive_commits", no_commits);
  report.meta.set("excluded_degenerate", degenerate);
  report.meta.set("intercept", "none (one indicator per API)");
  if (align.empty())
    throw EvalError("NoResolvableRecords", "no survey row resolves to model vectors");

  std::vector<std::vector<double>> dummies;
  std::vector<std::string> dummy_names;
  std::string absent;
  for (std::size_t k = 0; k < kSurveyApis.size(); ++k) {
    std::vector<double> col(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) col[i] = level[i] == k ? 1.0 : 0.0;
    if (std::find(col.begin(), col.end(), 1.0) == col.end()) {
      if (!absent.empty()) absent += ",";
      absent += kSurveyApis[k];
      continue;
    }
    dummies.push_back(std::move(col));
    dummy_names.push_back(std::string("api:") + kSurveyApis[k]);
  }
  if (!absent.empty()) report.meta.set("absent_api_levels", absent);

  auto fit = [&](const std::vector<double>& last, const char* last_name,
                 const std::vector<double>& response) {
    auto cols = dummies;
    auto names = dummy_names;
    cols.push_back(log_commits);
    names.emplace_back("log_commits");
    cols.push_back(last);
    names.emplace_back(last_name);
    return stats::ols(stats::design_from_columns(cols), response, names);
  };
  report.alignment_model = fit(score, "score", align);
  report.score_model = fit(align, "alignment", score);
  report.declared_vs_control = stats::paired_t_test(align, control);
  return report;
}

}  // namespace skillspace::eval
