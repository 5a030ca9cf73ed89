#include "skillspace/embed.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

namespace skillspace::embed {

// ---------------------------------------------------------------------------
// Vocabulary and tags

Vocabulary Vocabulary::from_counts(
    std::vector<std::pair<std::string, std::uint64_t>> counts,
    std::uint64_t min_count) {
  std::erase_if(counts, [&](const auto& e) { return e.second < min_count; });
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  v.min_count_ = min_count;
  v.tokens_.reserve(counts.size());
  v.counts_.reserve(counts.size());
  for (auto& [token, n] : counts) {
    const auto id = static_cast<std::uint32_t>(v.tokens_.size());
    if (!v.index_.emplace(token, id).second) {
      throw EmbedError("DuplicateToken", "token '" + token + "' listed twice");
    }
    v.tokens_.push_back(std::move(token));
    v.counts_.push_back(n);
  }
  return v;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string_view tag_kind_name(TagKind kind) {
  switch (kind) {
    case TagKind::kDeveloper: return "dev";
    case TagKind::kProject: return "proj";
    case TagKind::kLanguage: return "lang";
  }
  return "?";
}

namespace {

std::string tag_key(TagKind kind, std::string_view id) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(kind)));
  key += '\x1f';
  key += id;
  return key;
}

}  // namespace

TagSpace::TagSpace(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.kind != b.kind ? a.kind < b.kind : a.id < b.id;
  });
  for (std::uint32_t i = 0; i < entries_.size(); ++i) {
    if (static_cast<int>(entries_[i].kind) > 2) {
      throw EmbedError("BadTag", "unknown tag kind");
    }
    if (!index_.emplace(tag_key(entries_[i].kind, entries_[i].id), i).second) {
      throw EmbedError("DuplicateTag", "tag '" + entries_[i].id + "' listed twice");
    }
  }
}

std::optional<std::uint32_t> TagSpace::find(TagKind kind, std::string_view id) const {
  auto it = index_.find(tag_key(kind, id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TagSpace::count_of(TagKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [&](const Entry& e) { return e.kind == kind; }));
}

VocabBuild build_vocab(std::span<const corpus::DeltaRecord> records,
                       std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> token_counts;
  std::map<std::string, std::set<std::string>> token_langs;
  std::map<std::string, std::uint64_t> devs, projects, langs;
  std::int64_t max_ts = -1;

  for (const auto& r : records) {
    std::unordered_set<std::string_view> seen;
    for (const auto& api : r.apis) {
      if (!seen.insert(api).second) continue;
      ++token_counts[api];
      token_langs[api].insert(r.language);
    }
    ++devs[r.developer];
    ++projects[r.project];
    ++langs[r.language];
    max_ts = std::max(max_ts, r.timestamp);
  }

  VocabBuild build;
  build.vocab = Vocabulary::from_counts(
      {token_counts.begin(), token_counts.end()}, min_count);
  if (build.vocab.empty()) {
    throw EmbedError("EmptyVocabulary",
                     fmt::format("no API occurs in at least {} deltas", min_count));
  }

  std::vector<TagSpace::Entry> entries;
  for (const auto& [id, n] : devs) entries.push_back({TagKind::kDeveloper, id, n});
  for (const auto& [id, n] : projects) entries.push_back({TagKind::kProject, id, n});
  for (const auto& [id, n] : langs) entries.push_back({TagKind::kLanguage, id, n});
  build.tags = TagSpace(std::move(entries));

  build.token_languages.resize(build.vocab.size());
  for (std::uint32_t id = 0; id < build.vocab.size(); ++id) {
    for (const auto& lang : token_langs[build.vocab.token(id)]) {
      build.token_languages[id].push_back(*build.tags.find(TagKind::kLanguage, lang));
    }
  }
  build.max_timestamp = max_ts;
  return build;
}

// ---------------------------------------------------------------------------
// Noise distribution

NoiseTable::NoiseTable(const Vocabulary& vocab, double power) {
  if (vocab.empty()) throw EmbedError("EmptyVocabulary", "noise table needs tokens");
  cdf_.resize(vocab.size());
  double total = 0.0;
  for (std::uint32_t i = 0; i < vocab.size(); ++i) {
    total += std::pow(static_cast<double>(vocab.count(i)), power);
    cdf_[i] = total;
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::uint32_t NoiseTable::draw(Rng& rng) const {
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return static_cast<std::uint32_t>(std::min(idx, cdf_.size() - 1));
}

double NoiseTable::probability(std::uint32_t id) const {
  return id == 0 ? cdf_[0] : cdf_[id] - cdf_[id - 1];
}

// ---------------------------------------------------------------------------
// Objective

template <std::floating_point Real>
Real sigmoid(Real x) {
  if (x > static_cast<Real>(kSigmoidClamp)) return Real(1);
  if (x < -static_cast<Real>(kSigmoidClamp)) return Real(0);
  return Real(1) / (Real(1) + std::exp(-x));
}

template <std::floating_point Real>
Real log_sigmoid(Real x) {
  const Real c = std::clamp(x, -static_cast<Real>(kSigmoidClamp),
                            static_cast<Real>(kSigmoidClamp));
  return -std::log1p(std::exp(-c));
}

template float sigmoid<float>(float);
template double sigmoid<double>(double);
template float log_sigmoid<float>(float);
template double log_sigmoid<double>(double);

template <std::floating_point Real>
LossGrad<Real> loss_and_grad(const Matrix<Real>& input, const Matrix<Real>& tags,
                             const Matrix<Real>& output, const Example& ex) {
  const std::size_t dim = output.cols();
  const std::size_t n_ctx = ex.api_context.size() + ex.tag_context.size();
  if (n_ctx == 0) throw EmbedError("EmptyContext", "example has no context");

  LossGrad<Real> r;
  r.hidden.assign(dim, Real(0));
  for (auto id : ex.api_context) {
    const auto row = input.row(id);
    for (std::size_t j = 0; j < dim; ++j) r.hidden[j] += row[j];
  }
  for (auto id : ex.tag_context) {
    const auto row = tags.row(id);
    for (std::size_t j = 0; j < dim; ++j) r.hidden[j] += row[j];
  }
  const Real inv = Real(1) / static_cast<Real>(n_ctx);
  for (auto& h : r.hidden) h *= inv;

  r.hidden_grad.assign(dim, Real(0));
  auto score = [&](std::uint32_t id, bool positive) {
    const auto o = output.row(id);
    Real dot = 0;
    for (std::size_t j = 0; j < dim; ++j) dot += r.hidden[j] * o[j];
    // coefficient = dloss/ddot
    Real coeff;
    if (positive) {
      r.loss -= log_sigmoid(dot);
      coeff = sigmoid(dot) - Real(1);
    } else {
      r.loss -= log_sigmoid(-dot);
      coeff = sigmoid(dot);
    }
    RowGradient<Real> g{id, std::vector<Real>(dim)};
    for (std::size_t j = 0; j < dim; ++j) {
      r.hidden_grad[j] += coeff * o[j];
      g.grad[j] = coeff * r.hidden[j];
    }
    r.output_rows.push_back(std::move(g));
  };
  score(ex.target, true);
  for (auto id : ex.negatives) score(id, false);

  std::vector<Real> share(dim);
  for (std::size_t j = 0; j < dim; ++j) share[j] = r.hidden_grad[j] * inv;
  for (auto id : ex.api_context) r.api_rows.push_back({id, share});
  for (auto id : ex.tag_context) r.tag_rows.push_back({id, share});
  return r;
}

template LossGrad<float> loss_and_grad<float>(const Matrix<float>&, const Matrix<float>&,
                                              const Matrix<float>&, const Example&);
template LossGrad<double> loss_and_grad<double>(const Matrix<double>&,
                                                const Matrix<double>&,
                                                const Matrix<double>&, const Example&);

namespace {

// Element access policies: plain loads/stores for the deterministic single
// worker, relaxed atomics for lock-free parallel workers.
struct PlainAccess {
  template <typename T>
  static T load(const T& x) {
    return x;
  }
  template <typename T>
  static void store(T& x, T v) {
    x = v;
  }
};

struct RelaxedAccess {
  template <typename T>
  static T load(const T& x) {
    return std::atomic_ref<T>(const_cast<T&>(x)).load(std::memory_order_relaxed);
  }
  template <typename T>
  static void store(T& x, T v) {
    std::atomic_ref<T>(x).store(v, std::memory_order_relaxed);
  }
};

// scratch holds 2*dim values: hidden and its accumulated gradient step.
template <typename Access, typename Real>
Real sgd_step_impl(Matrix<Real>& input, Matrix<Real>& tags, Matrix<Real>& output,
                   const Example& ex, Real alpha, std::span<Real> scratch) {
  const std::size_t dim = output.cols();
  const std::size_t n_ctx = ex.api_context.size() + ex.tag_context.size();
  assert(n_ctx > 0 && scratch.size() >= 2 * dim);
  Real* hidden = scratch.data();
  Real* step = scratch.data() + dim;
  std::fill(hidden, hidden + 2 * dim, Real(0));

  for (auto id : ex.api_context) {
    assert(id < input.rows());
    const Real* row = input.row(id).data();
    for (std::size_t j = 0; j < dim; ++j) hidden[j] += Access::load(row[j]);
  }
  for (auto id : ex.tag_context) {
    assert(id < tags.rows());
    const Real* row = tags.row(id).data();
    for (std::size_t j = 0; j < dim; ++j) hidden[j] += Access::load(row[j]);
  }
  const Real inv = Real(1) / static_cast<Real>(n_ctx);
  for (std::size_t j = 0; j < dim; ++j) hidden[j] *= inv;

  Real loss = 0;
  auto update = [&](std::uint32_t id, bool positive) {
    assert(id < output.rows());
    Real* o = output.row(id).data();
    Real dot = 0;
    for (std::size_t j = 0; j < dim; ++j) dot += hidden[j] * Access::load(o[j]);
    Real g;
    if (positive) {
      loss -= log_sigmoid(dot);
      g = (Real(1) - sigmoid(dot)) * alpha;
    } else {
      loss -= log_sigmoid(-dot);
      g = -sigmoid(dot) * alpha;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const Real oj = Access::load(o[j]);
      step[j] += g * oj;
      Access::store(o[j], oj + g * hidden[j]);
    }
  };
  update(ex.target, true);
  for (auto id : ex.negatives) update(id, false);

  for (std::size_t j = 0; j < dim; ++j) step[j] *= inv;
  for (auto id : ex.api_context) {
    Real* row = input.row(id).data();
    for (std::size_t j = 0; j < dim; ++j)
      Access::store(row[j], Access::load(row[j]) + step[j]);
  }
  for (auto id : ex.tag_context) {
    Real* row = tags.row(id).data();
    for (std::size_t j = 0; j < dim; ++j)
      Access::store(row[j], Access::load(row[j]) + step[j]);
  }
  return loss;
}

}  // namespace

template <std::floating_point Real>
Real sgd_step(Matrix<Real>& input, Matrix<Real>& tags, Matrix<Real>& output,
              const Example& ex, Real alpha, std::span<Real> scratch) {
  return sgd_step_impl<PlainAccess>(input, tags, output, ex, alpha, scratch);
}

template float sgd_step<float>(Matrix<float>&, Matrix<float>&, Matrix<float>&,
                               const Example&, float, std::span<float>);
template double sgd_step<double>(Matrix<double>&, Matrix<double>&, Matrix<double>&,
                                 const Example&, double, std::span<double>);

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (negatives < 1) throw ConfigError("negatives must be >= 1");
  if (!(alpha_min < alpha_start) || !(alpha_min >= 0.0f)) {
    throw ConfigError("need 0 <= alpha_min < alpha_start");
  }
  if (window < 1) throw ConfigError("window must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  if (sample < 0.0) throw ConfigError("sample must be >= 0");
  if (!std::isfinite(unigram_power)) throw ConfigError("unigram_power must be finite");
}

EmbeddingModel initialize_model(VocabBuild build, const TrainConfig& config) {
  config.validate();
  EmbeddingModel m;
  m.vocab = std::move(build.vocab);
  m.tags = std::move(build.tags);
  m.token_languages = std::move(build.token_languages);
  m.max_train_timestamp = build.max_timestamp;
  m.config = config;
  const std::size_t dim = config.dim;
  m.input = Matrix<float>(m.vocab.size(), dim);
  m.tag = Matrix<float>(m.tags.size(), dim);
  m.output = Matrix<float>(m.vocab.size(), dim, 0.0f);

  Rng rng(config.seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (auto& x : m.input.data()) x = static_cast<float>(rng.uniform(-half, half));
  for (auto& x : m.tag.data()) x = static_cast<float>(rng.uniform(-half, half));
  return m;
}

namespace {

struct Document {
  std::vector<std::uint32_t> apis;
  std::vector<std::uint32_t> tags;
};

struct WorkerTotals {
  std::uint64_t seen = 0;
  std::uint64_t skipped_empty = 0;
  std::uint64_t skipped_degenerate = 0;
  std::uint64_t updates = 0;
  std::uint64_t negatives_skipped = 0;
  double loss = 0.0;

  void merge(const WorkerTotals& o) {
    seen += o.seen;
    skipped_empty += o.skipped_empty;
    skipped_degenerate += o.skipped_degenerate;
    updates += o.updates;
    negatives_skipped += o.negatives_skipped;
    loss += o.loss;
  }
};

class Trainer {
 public:
  Trainer(EmbeddingModel& model, std::vector<Document> docs, std::uint64_t skipped_empty)
      : model_(model),
        cfg_(model.config),
        docs_(std::move(docs)),
        skipped_empty_(skipped_empty),
        noise_(model.vocab, cfg_.unigram_power) {
    std::uint64_t positions = 0;
    for (const auto& d : docs_) positions += d.apis.size();
    total_updates_ = positions * cfg_.epochs;
    if (cfg_.sample > 0.0) {
      double total = 0.0;
      for (std::uint32_t i = 0; i < model_.vocab.size(); ++i)
        total += static_cast<double>(model_.vocab.count(i));
      keep_prob_.resize(model_.vocab.size());
      const double threshold = cfg_.sample * total;
      for (std::uint32_t i = 0; i < model_.vocab.size(); ++i) {
        const double f = static_cast<double>(model_.vocab.count(i));
        keep_prob_[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
      }
    }
  }

  TrainReport run() {
    TrainReport report;
    report.documents = docs_.size() + skipped_empty_;
    report.vocab_size = model_.vocab.size();
    report.tag_count = model_.tags.size();

    Rng order_rng(cfg_.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(docs_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::uint32_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      order_rng.shuffle(std::span<std::size_t>(order));
      WorkerTotals totals;
      if (cfg_.threads <= 1) {
        Rng rng(worker_seed(epoch, 0));
        totals = run_range<PlainAccess>(order, 0, order.size(), rng);
      } else {
        totals = run_parallel(order, epoch);
      }
      const auto t1 = std::chrono::steady_clock::now();

      EpochReport ep;
      ep.epoch = epoch + 1;
      ep.deltas_seen = totals.seen;
      ep.deltas_skipped_empty = skipped_empty_;
      ep.deltas_skipped_degenerate = totals.skipped_degenerate;
      ep.updates = totals.updates;
      ep.negatives_skipped = totals.negatives_skipped;
      ep.mean_loss = totals.updates ? totals.loss / static_cast<double>(totals.updates) : 0.0;
      ep.final_alpha = alpha_at(done_.load());
      ep.seconds = std::chrono::duration<double>(t1 - t0).count();
      report.epochs.push_back(ep);
    }
    return report;
  }

 private:
  std::uint64_t worker_seed(std::uint32_t epoch, std::uint32_t worker) const {
    return cfg_.seed + 0xD1B54A32D192ED03ULL * (1 + epoch) +
           0x8CB92BA72F3D8DD7ULL * (1 + worker);
  }

  double alpha_at(std::uint64_t done) const {
    if (total_updates_ == 0) return cfg_.alpha_start;
    const double frac = static_cast<double>(done) / static_cast<double>(total_updates_);
    const double a = cfg_.alpha_start - (cfg_.alpha_start - cfg_.alpha_min) * frac;
    return std::clamp(a, static_cast<double>(cfg_.alpha_min),
                      static_cast<double>(cfg_.alpha_start));
  }

  WorkerTotals run_parallel(const std::vector<std::size_t>& order, std::uint32_t epoch) {
    const std::size_t n = cfg_.threads;
    std::vector<WorkerTotals> per(n);
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t begin = order.size() * t / n;
      const std::size_t end = order.size() * (t + 1) / n;
      workers.emplace_back([&, t, begin, end] {
        Rng rng(worker_seed(epoch, static_cast<std::uint32_t>(t)));
        per[t] = run_range<RelaxedAccess>(order, begin, end, rng);
      });
    }
    for (auto& w : workers) w.join();
    WorkerTotals totals;
    for (const auto& p : per) totals.merge(p);
    return totals;
  }

  template <typename Access>
  WorkerTotals run_range(const std::vector<std::size_t>& order, std::size_t begin,
                         std::size_t end, Rng& rng) {
    WorkerTotals totals;
    const std::size_t dim = cfg_.dim;
    std::vector<float> scratch(2 * dim);
    std::vector<std::uint32_t> context;
    std::vector<std::uint32_t> negatives;
    std::vector<std::uint32_t> kept;

    for (std::size_t i = begin; i < end; ++i) {
      const Document& doc = docs_[order[i]];
      ++totals.seen;
      if (doc.apis.size() == 1 && doc.tags.empty()) {
        ++totals.skipped_degenerate;
        done_.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      const std::span<const std::uint32_t> apis = subsample(doc.apis, kept, rng);
      for (std::size_t t = 0; t < doc.apis.size(); ++t) {
        const std::uint64_t done = done_.fetch_add(1, std::memory_order_relaxed);
        if (t >= apis.size()) continue;  // positions removed by subsampling
        const std::uint32_t target = apis[t];
        context.clear();
        for (std::size_t c = 0; c < apis.size(); ++c)
          if (c != t) context.push_back(apis[c]);
        if (context.empty() && doc.tags.empty()) continue;

        negatives.clear();
        for (std::uint32_t k = 0; k < cfg_.negatives; ++k) {
          bool placed = false;
          for (int attempt = 0; attempt < 8; ++attempt) {
            const std::uint32_t neg = noise_.draw(rng);
            if (neg != target) {
              negatives.push_back(neg);
              placed = true;
              break;
            }
          }
          if (!placed) ++totals.negatives_skipped;
        }

        const auto alpha = static_cast<float>(alpha_at(done));
        assert(alpha >= cfg_.alpha_min && alpha <= cfg_.alpha_start);
        const Example ex{context, doc.tags, target, negatives};
        totals.loss += sgd_step_impl<Access>(model_.input, model_.tag, model_.output,
                                             ex, alpha, std::span<float>(scratch));
        ++totals.updates;
      }
    }
    return totals;
  }

  std::span<const std::uint32_t> subsample(const std::vector<std::uint32_t>& apis,
                                           std::vector<std::uint32_t>& kept, Rng& rng) {
    if (keep_prob_.empty()) return apis;
    kept.clear();
    for (auto id : apis)
      if (keep_prob_[id] >= 1.0 || rng.uniform01() < keep_prob_[id]) kept.push_back(id);
    return kept;
  }

  EmbeddingModel& model_;
  const TrainConfig& cfg_;
  std::vector<Document> docs_;
  std::uint64_t skipped_empty_;
  NoiseTable noise_;
  std::vector<double> keep_prob_;
  std::uint64_t total_updates_ = 0;
  std::atomic<std::uint64_t> done_{0};
};

}  // namespace

TrainResult train(std::span<const corpus::DeltaRecord> records,
                  const TrainConfig& config) {
  config.validate();
  TrainResult result;
  result.model = initialize_model(build_vocab(records, config.min_count), config);
  EmbeddingModel& model = result.model;

  std::vector<Document> docs;
  docs.reserve(records.size());
  std::uint64_t skipped_empty = 0;
  std::size_t longest = 0;
  for (const auto& r : records) {
    Document d;
    std::unordered_set<std::uint32_t> seen;
    for (const auto& api : r.apis) {
      if (auto id = model.vocab.find(api); id && seen.insert(*id).second)
        d.apis.push_back(*id);
    }
    if (d.apis.empty()) {
      ++skipped_empty;
      continue;
    }
    longest = std::max(longest, d.apis.size());
    if (config.developer_tags)
      d.tags.push_back(*model.tags.find(TagKind::kDeveloper, r.developer));
    if (config.project_tags)
      d.tags.push_back(*model.tags.find(TagKind::kProject, r.project));
    if (config.language_tags)
      d.tags.push_back(*model.tags.find(TagKind::kLanguage, r.language));
    docs.push_back(std::move(d));
  }
  if (longest > config.window) {
    throw EmbedError("WindowTooSmall",
                     fmt::format("longest delta has {} in-vocabulary APIs but the "
                                 "window is {}; filter oversized deltas or widen it",
                                 longest, config.window));
  }

  // Tags of a disabled kind stay in the tag space (language attribution
  // still refers to them) but carry zero vectors.
  for (std::uint32_t i = 0; i < model.tags.size(); ++i) {
    const auto kind = model.tags.entry(i).kind;
    const bool on = kind == TagKind::kDeveloper ? config.developer_tags
                    : kind == TagKind::kProject ? config.project_tags
                                                : config.language_tags;
    if (!on) std::fill(model.tag.row(i).begin(), model.tag.row(i).end(), 0.0f);
  }

  Trainer trainer(model, std::move(docs), skipped_empty);
  result.report = trainer.run();
  return result;
}

Table TrainReport::to_table() const {
  Table t({"epoch", "deltas_seen", "skipped_empty", "skipped_degenerate", "updates",
           "negatives_skipped", "mean_loss", "final_alpha", "seconds"});
  for (const auto& e : epochs) {
    t.add_row({std::to_string(e.epoch), std::to_string(e.deltas_seen),
               std::to_string(e.deltas_skipped_empty),
               std::to_string(e.deltas_skipped_degenerate), std::to_string(e.updates),
               std::to_string(e.negatives_skipped), fmt::format("{:.6f}", e.mean_loss),
               fmt::format("{:.6g}", e.final_alpha), fmt::format("{:.3f}", e.seconds)});
  }
  return t;
}

std::string TrainReport::to_text() const {
  std::string out = fmt::format("documents: {}  vocabulary: {}  tags: {}\n", documents,
                                vocab_size, tag_count);
  out += to_table().to_text();
  return out;
}

}  // namespace skillspace::embed
