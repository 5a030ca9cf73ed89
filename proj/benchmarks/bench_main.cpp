#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "skillspace/embed.hpp"
#include "skillspace/extract.hpp"
#include "skillspace/query.hpp"
#include "skillspace/synth.hpp"

using namespace skillspace;

namespace {

const std::vector<corpus::DeltaRecord>& training_corpus() {
  static const auto records = [] {
    synth::ClusterCorpusConfig cfg;
    cfg.deltas = 5000;
    cfg.developers = 100;
    cfg.clusters = 4;
    cfg.apis_per_cluster = 50;
    cfg.known_apis = 30;
    cfg.test_fraction = 0.0;
    return synth::cluster_corpus(cfg).train;
  }();
  return records;
}

void BM_TrainEpoch(benchmark::State& state) {
  embed::TrainConfig cfg;
  cfg.dim = static_cast<std::uint32_t>(state.range(0));
  cfg.threads = static_cast<std::uint32_t>(state.range(1));
  cfg.epochs = 1;
  cfg.min_count = 1;
  const auto& records = training_corpus();
  for (auto _ : state) benchmark::DoNotOptimize(embed::train(records, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_TrainEpoch)->Args({64, 1})->Args({200, 1})->Args({200, 4})->Unit(benchmark::kMillisecond);

void BM_MostSimilar(benchmark::State& state) {
  std::vector<std::string> apis;
  for (std::int64_t i = 0; i < state.range(0); ++i) apis.push_back("api" + std::to_string(i));
  const auto m = synth::random_model(apis, 100, 100, 200, 1);
  const model::EntityRef seed{model::EntityKind::kApi, "api0"};
  for (auto _ : state) benchmark::DoNotOptimize(query::most_similar(m, seed, 10));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MostSimilar)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_ExtractPython(benchmark::State& state) {
  std::string source;
  for (int i = 0; i < 200; ++i) {
    source += "import pkg" + std::to_string(i % 40) + ".sub as alias\n";
    source += "from mod" + std::to_string(i % 25) + " import thing\n";
    source += "x = compute(" + std::to_string(i) + ")  # not an import\n";
  }
  const auto* lang = extract::RuleSet::defaults().find("PY");
  for (auto _ : state) benchmark::DoNotOptimize(extract::extract_imports(*lang, source));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(source.size()));
}
BENCHMARK(BM_ExtractPython);

}  // namespace
BENCHMARK_MAIN();
