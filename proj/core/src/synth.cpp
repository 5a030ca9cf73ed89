#include "skillspace/synth.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "skillspace/query.hpp"
#include "skillspace/rng.hpp"
#include "skillspace/stats.hpp"

namespace skillspace::synth {

using corpus::DeltaRecord;
using embed::TagKind;

std::string api_name(std::size_t cluster, std::size_t index) {
  return fmt::format("c{}_api{:02d}", cluster, index);
}

std::string developer_name(std::size_t index) { return fmt::format("dev{:03d}", index); }

std::string project_name(std::size_t cluster, std::size_t index) {
  return fmt::format("c{}/proj{}", cluster, index);
}

ClusterCorpus cluster_corpus(const ClusterCorpusConfig& cfg) {
  if (cfg.clusters == 0 || cfg.developers == 0 || cfg.apis_per_cluster == 0 ||
      cfg.projects_per_cluster == 0 || cfg.min_apis == 0 || cfg.min_apis > cfg.max_apis ||
      cfg.known_apis == 0 || cfg.known_apis > cfg.apis_per_cluster ||
      cfg.train_projects == 0 || cfg.train_projects > cfg.projects_per_cluster ||
      cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw ConfigError("inconsistent cluster corpus configuration");
  }
  Rng rng(cfg.seed);
  ClusterCorpus out;
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    out.cluster_apis.emplace_back();
    for (std::size_t i = 0; i < cfg.apis_per_cluster; ++i)
      out.cluster_apis.back().push_back(api_name(c, i));
  }

  struct Profile {
    std::vector<std::size_t> known, unknown, projects;
    std::size_t new_project = 0;
  };
  std::vector<Profile> profiles(cfg.developers);
  for (std::size_t d = 0; d < cfg.developers; ++d) {
    out.developer_cluster.push_back(d % cfg.clusters);
    auto order = rng.sample_indices(cfg.apis_per_cluster, cfg.apis_per_cluster);
    auto& p = profiles[d];
    p.known.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.known_apis));
    p.unknown.assign(order.begin() + static_cast<std::ptrdiff_t>(cfg.known_apis), order.end());
    if (p.unknown.empty()) p.unknown = p.known;
    auto porder = rng.sample_indices(cfg.projects_per_cluster, cfg.projects_per_cluster);
    p.projects.assign(porder.begin(),
                      porder.begin() + static_cast<std::ptrdiff_t>(cfg.train_projects));
    p.new_project = cfg.train_projects < porder.size() ? porder[cfg.train_projects] : porder[0];
  }

  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(cfg.deltas) * cfg.test_fraction));
  const std::size_t n_train = cfg.deltas - n_test;
  auto make = [&](std::size_t d, const std::vector<std::size_t>& pool, std::size_t project,
                  std::int64_t ts) {
    const std::size_t c = out.developer_cluster[d];
    const std::size_t span = cfg.max_apis - cfg.min_apis + 1;
    const std::size_t k =
        std::min(pool.size(), cfg.min_apis + static_cast<std::size_t>(rng.uniform_below(span)));
    DeltaRecord r;
    r.language = cfg.language;
    r.project = project_name(c, project);
    r.timestamp = ts;
    r.developer = developer_name(d);
    for (auto i : rng.sample_indices(pool.size(), k))
      r.apis.push_back(out.cluster_apis[c][pool[i]]);
    return r;
  };
  for (std::size_t i = 0; i < n_train; ++i) {
    const std::size_t d = i % cfg.developers;
    const auto& p = profiles[d];
    const auto project = p.projects[rng.uniform_below(p.projects.size())];
    out.train.push_back(
        make(d, p.known, project, cfg.cutoff - static_cast<std::int64_t>(n_train - i) * 3600));
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t d = i % cfg.developers;
    const auto& p = profiles[d];
    out.test.push_back(
        make(d, p.unknown, p.new_project, cfg.cutoff + static_cast<std::int64_t>(i) * 3600));
  }
  return out;
}

embed::EmbeddingModel random_model(const std::vector<std::string>& apis,
                                   std::size_t developers, std::size_t projects,
                                   std::uint32_t dim, std::uint64_t seed,
                                   std::int64_t max_train_timestamp) {
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  for (const auto& a : apis) counts.emplace_back(a, 10);
  std::vector<embed::TagSpace::Entry> entries;
  for (std::size_t i = 0; i < developers; ++i)
    entries.push_back({TagKind::kDeveloper, developer_name(i), 10});
  for (std::size_t i = 0; i < projects; ++i)
    entries.push_back({TagKind::kProject, fmt::format("proj{:04d}", i), 10});
  entries.push_back({TagKind::kLanguage, "PY", 10});

  embed::VocabBuild build;
  build.vocab = embed::Vocabulary::from_counts(std::move(counts), 1);
  build.tags = embed::TagSpace(std::move(entries));
  const auto lang = *build.tags.find(TagKind::kLanguage, "PY");
  build.token_languages.assign(build.vocab.size(), {lang});
  build.max_timestamp = max_train_timestamp;

  embed::TrainConfig cfg;
  cfg.dim = dim;
  cfg.seed = seed;
  cfg.min_count = 1;
  auto m = embed::initialize_model(std::move(build), cfg);
  Rng rng(seed);
  for (auto& x : m.input.data()) x = static_cast<float>(rng.normal());
  for (auto& x : m.tag.data()) x = static_cast<float>(rng.normal());
  return m;
}

std::vector<eval::PrRecord> pr_records(const embed::EmbeddingModel& model,
                                       const PrConfig& cfg) {
  if (cfg.control_coefficients.size() != eval::PrRecord::kControls)
    throw ConfigError("need one coefficient per PR control");
  std::vector<std::uint32_t> devs, projs;
  for (std::uint32_t i = 0; i < model.tags.size(); ++i) {
    const auto& e = model.tags.entry(i);
    if (e.kind == TagKind::kDeveloper) devs.push_back(i);
    if (e.kind == TagKind::kProject) projs.push_back(i);
  }
  if (devs.empty() || projs.empty()) throw ConfigError("model has no developers or projects");

  Rng rng(cfg.seed);
  // log-scale location and spread of each count control; binaries use mu as p.
  static constexpr double kMu[eval::PrRecord::kControls] = {
      2.0, 1.5, 4.0, 3.5, 0.3, 3.0, 1.0, 0.5, 1.0, 3.5, 2.5, 1.0, 0.25, 0.5, 5.0, 1.5, 0.4};
  std::vector<eval::PrRecord> out(cfg.records);
  std::vector<double> sim(cfg.records, 0.0);
  std::vector<bool> resolvable(cfg.records, true);
  for (std::size_t i = 0; i < cfg.records; ++i) {
    auto& r = out[i];
    const auto d = devs[rng.uniform_below(devs.size())];
    const auto p = projs[rng.uniform_below(projs.size())];
    r.project = model.tags.entry(p).id;
    if (rng.uniform01() < cfg.unresolvable_fraction) {
      r.developer = fmt::format("ghost{:05d}", i);
      resolvable[i] = false;
    } else {
      r.developer = model.tags.entry(d).id;
      sim[i] = query::cosine(model.tag.row(d), model.tag.row(p));
    }
    for (std::size_t j = 0; j < eval::PrRecord::kControls; ++j) {
      r.controls[j] = eval::PrRecord::is_binary_control(j)
                          ? (rng.uniform01() < kMu[j] ? 1.0 : 0.0)
                          : std::floor(std::exp(rng.normal(kMu[j], 1.0)));
    }
  }

  std::vector<double> logit(cfg.records, cfg.intercept);
  for (std::size_t i = 0; i < cfg.records; ++i) logit[i] += cfg.similarity_coefficient * sim[i];
  for (std::size_t j = 0; j < eval::PrRecord::kControls; ++j) {
    std::vector<double> col(cfg.records);
    for (std::size_t i = 0; i < cfg.records; ++i) col[i] = out[i].controls[j];
    if (!eval::PrRecord::is_binary_control(j)) {
      for (auto& v : col) v = std::log1p(v);
      const double m = stats::mean(col);
      const double sd = std::sqrt(stats::sample_variance(col));
      for (auto& v : col) v = sd > 0 ? (v - m) / sd : 0.0;
    }
    for (std::size_t i = 0; i < cfg.records; ++i)
      logit[i] += cfg.control_coefficients[j] * col[i];
  }
  for (std::size_t i = 0; i < cfg.records; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-logit[i]));
    out[i].accepted = rng.uniform01() < prob ? 1 : 0;
  }
  return out;
}

std::vector<eval::SurveyRecord> survey_records(const embed::EmbeddingModel& model,
                                               const SurveyConfig& cfg) {
  std::vector<std::uint32_t> devs;
  for (std::uint32_t i = 0; i < model.tags.size(); ++i)
    if (model.tags.entry(i).kind == TagKind::kDeveloper) devs.push_back(i);
  if (devs.empty()) throw ConfigError("model has no developers");

  Rng rng(cfg.seed);
  std::vector<eval::SurveyRecord> out;
  for (std::size_t i = 0; i < cfg.respondents; ++i) {
    const auto d = devs[rng.uniform_below(devs.size())];
    const std::string api = eval::kSurveyApis[rng.uniform_below(eval::kSurveyApis.size())];
    auto id = model.vocab.find(api);
    if (!id && api == "socketio") id = model.vocab.find("socket.io");
    if (!id) throw ConfigError("model lacks survey API " + api);
    const double a = query::cosine(model.tag.row(d), model.input.row(*id));
    const double raw = 3.0 + cfg.alignment_coefficient * a + rng.normal(0.0, cfg.noise_sd);
    eval::SurveyRecord r;
    r.developer = model.tags.entry(d).id;
    r.api = api;
    r.score = static_cast<int>(std::clamp(std::round(raw), 1.0, 5.0));
    r.commits = std::floor(std::exp(rng.normal(3.0, 1.2))) + 1.0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace skillspace::synth
