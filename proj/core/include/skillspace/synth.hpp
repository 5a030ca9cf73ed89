#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skillspace/corpus.hpp"
#include "skillspace/embed.hpp"
#include "skillspace/eval.hpp"

// Seeded synthetic data with known structure, for tests, benchmarks and
// demos.
namespace skillspace::synth {

struct ClusterCorpusConfig {
  std::size_t deltas = 2000;
  std::size_t developers = 40;
  std::size_t clusters = 2;
  std::size_t apis_per_cluster = 20;
  std::size_t projects_per_cluster = 4;
  // Each developer uses this many of their cluster's APIs before the cutoff
  // and draws test deltas from the rest.
  std::size_t known_apis = 12;
  std::size_t train_projects = 2;
  double test_fraction = 0.1;
  std::size_t min_apis = 3;
  std::size_t max_apis = 6;
  std::string language = "PY";
  std::int64_t cutoff = eval::kFutureActivityCutoff;
  std::uint64_t seed = 11;
};

// Developers are assigned round-robin to clusters; every delta draws its APIs
// and project from the author's cluster only. Test deltas use APIs and a
// project the author never touched before the cutoff.
struct ClusterCorpus {
  std::vector<corpus::DeltaRecord> train;
  std::vector<corpus::DeltaRecord> test;
  std::vector<std::vector<std::string>> cluster_apis;
  std::vector<std::size_t> developer_cluster;
};

ClusterCorpus cluster_corpus(const ClusterCorpusConfig& cfg);

std::string api_name(std::size_t cluster, std::size_t index);
std::string developer_name(std::size_t index);
std::string project_name(std::size_t cluster, std::size_t index);

// Model with Gaussian rows for the given tokens, developers and projects
// (plus a single language tag). Output vectors are zero.
embed::EmbeddingModel random_model(const std::vector<std::string>& apis,
                                   std::size_t developers, std::size_t projects,
                                   std::uint32_t dim, std::uint64_t seed,
                                   std::int64_t max_train_timestamp = 0);

struct PrConfig {
  std::size_t records = 5000;
  double similarity_coefficient = 1.0;
  double intercept = 0.2;
  // Coefficients for the scaled controls, in PrRecord order.
  std::vector<double> control_coefficients = {0.3, -0.2, 0.1,  0.25, 0.4, -0.15,
                                              0.2, -0.1, 0.05, 0.1,  0.0, -0.05,
                                              0.3, 0.2,  0.1,  -0.1, 0.15};
  // Share of records pointing at a developer unknown to the model.
  double unresolvable_fraction = 0.0;
  std::uint64_t seed = 3;
};

// Acceptance is Bernoulli(logistic(intercept + b * cos(dev, project) +
// controls)), with the controls entering on the same scale the harness
// uses (log1p + standardize for counts, raw binaries).
std::vector<eval::PrRecord> pr_records(const embed::EmbeddingModel& model,
                                       const PrConfig& cfg);

struct SurveyConfig {
  std::size_t respondents = 300;
  double alignment_coefficient = 4.0;
  double noise_sd = 0.6;
  std::uint64_t seed = 5;
};

// Score = clamp(round(3 + b * cos(dev, api) + noise), 1, 5).
std::vector<eval::SurveyRecord> survey_records(const embed::EmbeddingModel& model,
                                               const SurveyConfig& cfg);

}  // namespace skillspace::synth
