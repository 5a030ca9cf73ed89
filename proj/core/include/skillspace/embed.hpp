#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillspace/corpus.hpp"
#include "skillspace/error.hpp"
#include "skillspace/matrix.hpp"
#include "skillspace/rng.hpp"
#include "skillspace/tabular.hpp"

namespace skillspace::embed {

class EmbedError : public Error {
 public:
  using Error::Error;
};

// API tokens that survived the min-count cut, ordered by descending delta
// count then token.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Entries with count < min_count are dropped.
  static Vocabulary from_counts(
      std::vector<std::pair<std::string, std::uint64_t>> counts,
      std::uint64_t min_count);

  std::optional<std::uint32_t> find(std::string_view token) const;
  const std::string& token(std::uint32_t id) const { return tokens_[id]; }
  std::uint64_t count(std::uint32_t id) const { return counts_[id]; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::uint64_t min_count() const { return min_count_; }

  bool operator==(const Vocabulary& o) const {
    return tokens_ == o.tokens_ && counts_ == o.counts_ && min_count_ == o.min_count_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t min_count_ = 0;
};

enum class TagKind : std::uint8_t { kDeveloper = 0, kProject = 1, kLanguage = 2 };

std::string_view tag_kind_name(TagKind kind);

// Document tags. Indices are dense; each kind occupies a contiguous block
// (developers, then projects, then languages), ids sorted within a block.
class TagSpace {
 public:
  struct Entry {
    TagKind kind;
    std::string id;
    std::uint64_t count;
    bool operator==(const Entry&) const = default;
  };

  TagSpace() = default;
  explicit TagSpace(std::vector<Entry> entries);

  std::optional<std::uint32_t> find(TagKind kind, std::string_view id) const;
  const Entry& entry(std::uint32_t index) const { return entries_[index]; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count_of(TagKind kind) const;
  const std::vector<Entry>& entries() const { return entries_; }

  bool operator==(const TagSpace& o) const { return entries_ == o.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;  // "<kind>\x1f<id>"
};

struct TrainConfig {
  std::uint32_t dim = 200;
  std::uint32_t negatives = 20;
  std::uint32_t epochs = 10;
  float alpha_start = 0.025f;
  float alpha_min = 1e-4f;
  std::uint32_t window = 30;
  std::uint64_t seed = 1;
  double unigram_power = 0.75;
  std::uint32_t threads = 1;
  std::uint64_t min_count = 5;
  // Frequent-token subsampling threshold; 0 disables it.
  double sample = 0.0;
  // Disabled tag kinds are not trained and keep all-zero vectors.
  bool developer_tags = true;
  bool project_tags = true;
  bool language_tags = true;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// The Skill Space: input API vectors, tag vectors and output vectors.
struct EmbeddingModel {
  Vocabulary vocab;
  TagSpace tags;
  Matrix<float> input;   // vocab.size() x dim
  Matrix<float> tag;     // tags.size() x dim
  Matrix<float> output;  // vocab.size() x dim
  TrainConfig config;
  // Largest training timestamp, -1 when unknown.
  std::int64_t max_train_timestamp = -1;
  // Per API, the sorted language tag indices it was seen with in training.
  std::vector<std::vector<std::uint32_t>> token_languages;

  std::size_t dim() const { return input.cols(); }
};

struct VocabBuild {
  Vocabulary vocab;
  TagSpace tags;
  std::vector<std::vector<std::uint32_t>> token_languages;
  std::int64_t max_timestamp = -1;
};

// Delta-level counts (a token counts once per delta). Throws
// EmbedError("EmptyVocabulary") when nothing reaches min_count.
VocabBuild build_vocab(std::span<const corpus::DeltaRecord> records,
                       std::uint64_t min_count);

// Unigram^power sampling distribution over the vocabulary.
class NoiseTable {
 public:
  NoiseTable(const Vocabulary& vocab, double power);

  std::uint32_t draw(Rng& rng) const;
  double probability(std::uint32_t id) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

// One negative-sampling prediction: the hidden layer is the mean of the API
// rows and tag rows listed in the context.
struct Example {
  std::span<const std::uint32_t> api_context;
  std::span<const std::uint32_t> tag_context;
  std::uint32_t target = 0;
  std::span<const std::uint32_t> negatives;
};

template <typename Real>
struct RowGradient {
  std::uint32_t row;
  std::vector<Real> grad;
};

template <typename Real>
struct LossGrad {
  Real loss = 0;
  std::vector<Real> hidden;       // the mean context vector
  std::vector<Real> hidden_grad;  // dloss/dhidden
  // Target first, then one entry per negative (repeats are not merged).
  std::vector<RowGradient<Real>> output_rows;
  // One entry per context slot: hidden_grad / context size.
  std::vector<RowGradient<Real>> api_rows;
  std::vector<RowGradient<Real>> tag_rows;
};

inline constexpr double kSigmoidClamp = 30.0;

template <std::floating_point Real>
Real sigmoid(Real x);

// log(sigmoid(x)) with the argument clamped to +/-kSigmoidClamp.
template <std::floating_point Real>
Real log_sigmoid(Real x);

// Exact analytic loss and partial derivatives of
//   -log s(h.o_t) - sum_k log s(-h.o_k).
template <std::floating_point Real>
LossGrad<Real> loss_and_grad(const Matrix<Real>& input, const Matrix<Real>& tags,
                             const Matrix<Real>& output, const Example& ex);

// In-place SGD update for one example (descent along loss_and_grad with
// learning rate alpha). Returns the loss before the update.
template <std::floating_point Real>
Real sgd_step(Matrix<Real>& input, Matrix<Real>& tags, Matrix<Real>& output,
              const Example& ex, Real alpha, std::span<Real> scratch);

struct EpochReport {
  std::uint32_t epoch = 0;
  std::uint64_t deltas_seen = 0;
  std::uint64_t deltas_skipped_empty = 0;       // no in-vocabulary API
  std::uint64_t deltas_skipped_degenerate = 0;  // lone API and no tags
  std::uint64_t updates = 0;
  std::uint64_t negatives_skipped = 0;
  double mean_loss = 0.0;
  double final_alpha = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochReport> epochs;
  std::uint64_t documents = 0;
  std::size_t vocab_size = 0;
  std::size_t tag_count = 0;

  Table to_table() const;
  std::string to_text() const;
};

struct TrainResult {
  EmbeddingModel model;
  TrainReport report;
};

// Initialized but untrained model: input/tag rows uniform in
// [-0.5/dim, 0.5/dim], output rows zero.
EmbeddingModel initialize_model(VocabBuild build, const TrainConfig& config);

TrainResult train(std::span<const corpus::DeltaRecord> records,
                  const TrainConfig& config);

}  // namespace skillspace::embed
