#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "skillspace/embed.hpp"
#include "skillspace/model.hpp"
#include "skillspace/query.hpp"

namespace skillspace::testing {

// Five hand-placed API vectors plus one developer and two languages, dim 3.
inline embed::EmbeddingModel toy_model() {
  using embed::TagKind;
  embed::VocabBuild b;
  b.vocab = embed::Vocabulary::from_counts(
      {{"alpha", 9}, {"beta", 9}, {"gamma", 9}, {"delta", 9}, {"eps", 9}}, 1);
  b.tags = embed::TagSpace({{TagKind::kDeveloper, "alice", 3},
                            {TagKind::kLanguage, "PY", 4},
                            {TagKind::kLanguage, "R", 2}});
  const auto py = *b.tags.find(TagKind::kLanguage, "PY");
  const auto r = *b.tags.find(TagKind::kLanguage, "R");
  b.token_languages.resize(5);
  for (const char* t : {"alpha", "beta", "gamma"}) b.token_languages[*b.vocab.find(t)] = {py};
  for (const char* t : {"delta", "eps"}) b.token_languages[*b.vocab.find(t)] = {r};
  b.max_timestamp = 100;

  embed::TrainConfig cfg;
  cfg.dim = 3;
  cfg.min_count = 1;
  auto m = embed::initialize_model(std::move(b), cfg);
  auto set = [](std::span<float> row, std::vector<float> v) {
    std::copy(v.begin(), v.end(), row.begin());
  };
  set(m.input.row(*m.vocab.find("alpha")), {1.0f, 0.0f, 0.0f});
  set(m.input.row(*m.vocab.find("beta")), {0.9f, 0.1f, 0.0f});
  set(m.input.row(*m.vocab.find("gamma")), {0.0f, 1.0f, 0.0f});
  set(m.input.row(*m.vocab.find("delta")), {0.0f, 0.8f, 0.6f});
  set(m.input.row(*m.vocab.find("eps")), {-1.0f, 0.25f, 0.0f});
  set(m.tag.row(*m.tags.find(embed::TagKind::kDeveloper, "alice")), {0.5f, 0.5f, 0.0f});
  set(m.tag.row(py), {1.0f, 0.5f, -0.25f});
  set(m.tag.row(r), {-0.5f, 0.5f, 1.0f});
  return m;
}

// Independent brute-force reference: long double cosines over every row,
// ordered by score then printable id.
struct OracleHit {
  std::string id;
  long double score;
};

inline long double oracle_cosine(std::span<const float> a, std::span<const float> b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return dot / std::sqrt(na * nb);
}

inline std::vector<OracleHit> oracle_scan(const embed::EmbeddingModel& m,
                                          std::span<const float> q,
                                          const std::vector<std::string>& exclude) {
  std::vector<OracleHit> hits;
  for (std::uint32_t i = 0; i < m.vocab.size(); ++i) {
    const auto& id = m.vocab.token(i);
    if (std::find(exclude.begin(), exclude.end(), id) != exclude.end()) continue;
    hits.push_back({id, oracle_cosine(q, m.input.row(i))});
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return hits;
}

}  // namespace skillspace::testing
