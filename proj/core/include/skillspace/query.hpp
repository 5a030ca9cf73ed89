#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skillspace/error.hpp"
#include "skillspace/model.hpp"
#include "skillspace/tabular.hpp"

namespace skillspace::query {

using model::EmbeddingModel;
using model::EntityKind;
using model::EntityRef;

class QueryError : public Error {
 public:
  using Error::Error;
};

struct Neighbor {
  EntityRef entity;
  double score = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct AlignmentScore {
  double value = 0.0;
  std::size_t n_items = 0;
  std::size_t n_skipped = 0;  // unresolvable APIs
};

enum class Aggregation { kMeanOfCosines, kCentroid };

// Cosine with 64-bit accumulation, clamped to [-1, 1]. Throws
// QueryError("ZeroVector") or QueryError("DimensionMismatch").
double cosine(std::span<const float> a, std::span<const float> b);

// Candidate restriction for neighbor scans. `kind` empty means every kind;
// `language` keeps only APIs seen with that corpus language (tags are not
// language-attributed and pass the language filter unchanged).
struct CandidateFilter {
  std::optional<EntityKind> kind = EntityKind::kApi;
  std::optional<std::string> language;
};

// Exact scan over all candidate rows. Rows with zero norm are skipped.
std::vector<Neighbor> most_similar(const EmbeddingModel& model, const EntityRef& seed,
                                   std::size_t top_n, const CandidateFilter& filter = {});
std::vector<Neighbor> most_similar(const EmbeddingModel& model,
                                   std::span<const float> query, std::size_t top_n,
                                   const CandidateFilter& filter = {},
                                   std::span<const EntityRef> exclude = {});

struct Term {
  int sign = 1;  // +1 or -1
  EntityRef entity;
};

// Parses "-lang:PY +lang:R +api:pandas" (a leading sign is optional for the
// first term).
std::vector<Term> parse_expression(std::string_view text);

// Signed sum of raw vectors. Terms are merged per entity first, so a term and
// its negation cancel exactly; entities with a nonzero net coefficient are
// excluded from the results.
std::vector<Neighbor> analogy(const EmbeddingModel& model, std::span<const Term> terms,
                              std::size_t top_n, const CandidateFilter& filter = {});

AlignmentScore align_to_apis(const EmbeddingModel& model, const EntityRef& dev,
                             std::span<const std::string> apis,
                             Aggregation aggregation = Aggregation::kMeanOfCosines);

double align_pair(const EmbeddingModel& model, const EntityRef& a, const EntityRef& b);

Table neighbors_table(std::span<const Neighbor> neighbors);

}  // namespace skillspace::query
