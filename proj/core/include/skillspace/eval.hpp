#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skillspace/corpus.hpp"
#include "skillspace/error.hpp"
#include "skillspace/model.hpp"
#include "skillspace/query.hpp"
#include "skillspace/stats.hpp"
#include "skillspace/tabular.hpp"

namespace skillspace::eval {

using corpus::DeltaRecord;
using model::EmbeddingModel;

class EvalError : public Error {
 public:
  using Error::Error;
};

// 2019-02-01 00:00 UTC and 2018-02-14 00:00 UTC.
inline constexpr std::int64_t kFutureActivityCutoff = 1548979200;
inline constexpr std::int64_t kPrSurveyCutoff = 1518566400;

struct EvalConfig {
  std::int64_t cutoff = kFutureActivityCutoff;
  std::uint64_t seed = 7;
  // Control items drawn per factual item.
  std::size_t n_random = 1;
  // Group t-tests by corpus language. Unset: per language for H1, pooled for
  // H2 and H3.
  std::optional<bool> per_language;
  query::Aggregation aggregation = query::Aggregation::kMeanOfCosines;
  // Random control APIs per survey respondent.
  std::size_t survey_controls = 10;

  void validate() const;
};

// Ordered key/value metadata embedded in every report.
struct ReportMeta {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  std::optional<std::string> get(const std::string& key) const;
  // "# key: value" lines.
  std::string to_comment_block() const;
};

struct TTestRow {
  std::string group;  // language or "ALL"
  std::size_t subjects = 0;
  double mean_factual = 0.0;
  double mean_control = 0.0;
  std::optional<stats::TTestResult> result;
  std::string error;  // set when the group could not be tested
};

struct TTestReport {
  std::string hypothesis;
  std::string test;  // "paired" or "welch"
  std::vector<TTestRow> rows;
  ReportMeta meta;

  const TTestRow* find(const std::string& group) const;
  Table to_table() const;
  std::string to_csv() const;
  std::string to_text() const;
};

struct RegressionReport {
  std::string hypothesis;
  stats::RegressionResult result;
  ReportMeta meta;
  std::vector<std::string> warnings;

  std::string to_csv() const;
  std::string to_text() const;
};

// H1: developers' new test-period APIs vs random same-language APIs.
TTestReport eval_new_apis(const EmbeddingModel& model, std::span<const DeltaRecord> train,
                          std::span<const DeltaRecord> test, const EvalConfig& cfg);

// H2: projects a developer joins in the test period vs untouched projects.
TTestReport eval_new_projects(const EmbeddingModel& model,
                              std::span<const DeltaRecord> train,
                              std::span<const DeltaRecord> test, const EvalConfig& cfg);

// H3: a project's new contributors vs developers who never contributed.
TTestReport eval_new_contributors(const EmbeddingModel& model,
                                  std::span<const DeltaRecord> train,
                                  std::span<const DeltaRecord> test,
                                  const EvalConfig& cfg);

struct PrRecord {
  static constexpr std::size_t kControls = 17;
  static const std::array<const char*, kControls>& control_names();
  static bool is_binary_control(std::size_t index);

  std::string developer;
  std::string project;
  int accepted = 0;
  std::array<double, kControls> controls{};
};

std::vector<PrRecord> parse_pr_csv(const CsvFile& csv);
std::vector<PrRecord> read_pr_csv(const std::filesystem::path& path);

// H4: logistic regression of PR acceptance on developer-project alignment
// plus the control predictors (counts log1p-scaled and standardized).
RegressionReport eval_pr_acceptance(const EmbeddingModel& model,
                                    std::span<const PrRecord> prs, const EvalConfig& cfg);

inline constexpr std::array<const char*, 3> kSurveyApis = {"mongodb", "react", "socketio"};

struct SurveyRecord {
  std::string developer;
  std::string api;
  int score = 0;
  double commits = 0.0;
};

std::vector<SurveyRecord> parse_survey_csv(const CsvFile& csv);
std::vector<SurveyRecord> read_survey_csv(const std::filesystem::path& path);

struct SurveyReport {
  // (A) alignment ~ API indicators + log(commits) + score
  stats::RegressionResult alignment_model;
  // (B) score ~ API indicators + log(commits) + alignment
  stats::RegressionResult score_model;
  // Declared-API alignment vs mean alignment to the random control APIs.
  stats::TTestResult declared_vs_control;
  ReportMeta meta;

  std::string to_csv() const;
  std::string to_text() const;
};

// H5: self-reported expertise vs alignment to the declared API.
SurveyReport eval_self_reported(const EmbeddingModel& model,
                                std::span<const SurveyRecord> survey,
                                const EvalConfig& cfg);

}  // namespace skillspace::eval
