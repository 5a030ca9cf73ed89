#include "skillspace/query.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace skillspace::query {

namespace {

std::span<const float> resolve(const EmbeddingModel& model, const EntityRef& ref) {
  auto v = model::vector(model, ref);
  if (!v) throw QueryError("UnknownEntity", "unknown entity " + ref.to_string());
  return *v;
}

bool before(const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.entity.id != b.entity.id) return a.entity.id < b.entity.id;
  return a.entity.kind < b.entity.kind;
}

double squared_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return s;
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw QueryError("DimensionMismatch",
                     fmt::format("vectors of length {} and {}", a.size(), b.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  const double na = squared_norm(a);
  const double nb = squared_norm(b);
  if (na == 0.0 || nb == 0.0) throw QueryError("ZeroVector", "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<Neighbor> most_similar(const EmbeddingModel& model,
                                   std::span<const float> query, std::size_t top_n,
                                   const CandidateFilter& filter,
                                   std::span<const EntityRef> exclude) {
  if (top_n < 1) throw QueryError("BadTopN", "top_n must be >= 1");
  if (query.size() != model.dim()) {
    throw QueryError("DimensionMismatch",
                     fmt::format("query has length {}, model dim is {}", query.size(),
                                 model.dim()));
  }
  if (squared_norm(query) == 0.0) throw QueryError("ZeroVector", "query vector is zero");

  auto excluded = [&](EntityKind kind, const std::string& id) {
    return std::any_of(exclude.begin(), exclude.end(), [&](const EntityRef& e) {
      return e.kind == kind && e.id == id;
    });
  };
  auto wanted = [&](EntityKind kind) { return !filter.kind || *filter.kind == kind; };

  std::vector<Neighbor> all;
  if (wanted(EntityKind::kApi)) {
    std::optional<std::uint32_t> lang_tag;
    if (filter.language) lang_tag = model.tags.find(embed::TagKind::kLanguage, *filter.language);
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
      if (filter.language) {
        if (!lang_tag) break;
        const auto& langs = model.token_languages[i];
        if (!std::binary_search(langs.begin(), langs.end(), *lang_tag)) continue;
      }
      const auto& token = model.vocab.token(i);
      if (excluded(EntityKind::kApi, token)) continue;
      const auto row = model.input.row(i);
      if (squared_norm(row) == 0.0) continue;
      all.push_back({{EntityKind::kApi, token}, cosine(query, row)});
    }
  }
  for (std::uint32_t i = 0; i < model.tags.size(); ++i) {
    const auto& e = model.tags.entry(i);
    const EntityKind kind = model::entity_kind_of(e.kind);
    if (!wanted(kind) || excluded(kind, e.id)) continue;
    const auto row = model.tag.row(i);
    if (squared_norm(row) == 0.0) continue;
    all.push_back({{kind, e.id}, cosine(query, row)});
  }

  const std::size_t n = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(n), all.end(), before);
  all.resize(n);
  return all;
}

std::vector<Neighbor> most_similar(const EmbeddingModel& model, const EntityRef& seed,
                                   std::size_t top_n, const CandidateFilter& filter) {
  const Term term{1, seed};
  return analogy(model, std::span<const Term>(&term, 1), top_n, filter);
}

std::vector<Term> parse_expression(std::string_view text) {
  std::vector<Term> terms;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    if (i >= text.size()) break;
    int sign = 1;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
      while (i < text.size() && text[i] == ' ') ++i;
    }
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i == start) throw QueryError("BadExpression", "dangling sign in expression");
    terms.push_back({sign, EntityRef::parse(text.substr(start, i - start))});
  }
  if (terms.empty()) throw QueryError("BadExpression", "empty expression");
  return terms;
}

std::vector<Neighbor> analogy(const EmbeddingModel& model, std::span<const Term> terms,
                              std::size_t top_n, const CandidateFilter& filter) {
  if (terms.empty()) throw QueryError("BadExpression", "empty expression");
  std::map<EntityRef, int> net;
  for (const auto& t : terms) {
    if (t.sign != 1 && t.sign != -1) throw QueryError("BadExpression", "sign must be +1 or -1");
    resolve(model, t.entity);
    net[t.entity] += t.sign;
  }

  std::vector<double> sum(model.dim(), 0.0);
  std::vector<EntityRef> exclude;
  for (const auto& [entity, coeff] : net) {
    if (coeff == 0) continue;
    exclude.push_back(entity);
    const auto v = resolve(model, entity);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += coeff * static_cast<double>(v[j]);
  }
  std::vector<float> query(sum.size());
  for (std::size_t j = 0; j < sum.size(); ++j) query[j] = static_cast<float>(sum[j]);
  return most_similar(model, query, top_n, filter, exclude);
}

AlignmentScore align_to_apis(const EmbeddingModel& model, const EntityRef& dev,
                             std::span<const std::string> apis, Aggregation aggregation) {
  const auto dv = resolve(model, dev);
  AlignmentScore score;
  std::vector<std::span<const float>> rows;
  for (const auto& api : apis) {
    if (auto id = model.vocab.find(api)) {
      rows.push_back(model.input.row(*id));
    } else {
      ++score.n_skipped;
    }
  }
  if (rows.empty()) {
    throw QueryError("NoResolvableApis",
                     fmt::format("none of {} APIs is in the vocabulary", apis.size()));
  }
  score.n_items = rows.size();
  if (aggregation == Aggregation::kMeanOfCosines) {
    double total = 0.0;
    for (const auto& r : rows) total += cosine(dv, r);
    score.value = total / static_cast<double>(rows.size());
  } else {
    std::vector<double> mean(model.dim(), 0.0);
    for (const auto& r : rows)
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
    std::vector<float> centroid(mean.size());
    for (std::size_t j = 0; j < mean.size(); ++j)
      centroid[j] = static_cast<float>(mean[j] / static_cast<double>(rows.size()));
    score.value = cosine(dv, centroid);
  }
  return score;
}

double align_pair(const EmbeddingModel& model, const EntityRef& a, const EntityRef& b) {
  return cosine(resolve(model, a), resolve(model, b));
}

Table neighbors_table(std::span<const Neighbor> neighbors) {
  Table t({"rank", "entity", "cosine"});
  std::size_t rank = 0;
  for (const auto& n : neighbors) {
    const std::string id =
        n.entity.kind == EntityKind::kApi ? n.entity.id : n.entity.to_string();
    t.add_row({std::to_string(++rank), id, fmt::format("{:.4f}", n.score)});
  }
  return t;
}

}  // namespace skillspace::query
