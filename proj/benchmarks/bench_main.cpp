#include <benchmark/benchmark.h>

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "coba/ensemble.hpp"
#include "coba/importance.hpp"
#include "coba/tokenize.hpp"
#include "coba/triple.hpp"

namespace {

using namespace coba;

const std::vector<std::string> kWords = {"love", "movie", "theater", "ohio", "plot", "actor",
                                         "bland", "great", "ending", "sad", "fresh", "cast",
                                         "score", "night", "story", "crowd"};

Example sentence(std::size_t n) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) text += (i ? " " : "") + kWords[i % kWords.size()];
  return {"bench", text, std::nullopt, Label::Positive};
}

std::unique_ptr<Classifier> additive_model() {
  return std::make_unique<CallbackClassifier>(
      "additive", TaskKind::SentimentBinary, [](const std::string& text) {
        double p = 0.5;
        for (const auto& tok : tokenize(text)) p += tok.size() % 3 == 0 ? 0.01 : -0.005;
        return std::vector<double>{p, 1 - p};
      });
}

void BM_ShapleyExact(benchmark::State& state) {
  const auto ex = sentence(static_cast<std::size_t>(state.range(0)));
  const auto model = additive_model();
  ShapleyOptions opts;
  opts.mode = ShapleyMode::Exact;
  for (auto _ : state) benchmark::DoNotOptimize(shapley_importance(*model, ex, opts));
}
BENCHMARK(BM_ShapleyExact)->Arg(6)->Arg(10)->Arg(12);

void BM_ShapleySampled(benchmark::State& state) {
  const auto ex = sentence(static_cast<std::size_t>(state.range(0)));
  const auto model = additive_model();
  ShapleyOptions opts;
  opts.n_permutations = 200;
  for (auto _ : state) benchmark::DoNotOptimize(shapley_importance(*model, ex, opts));
}
BENCHMARK(BM_ShapleySampled)->Arg(20)->Arg(60);

void BM_Lime(benchmark::State& state) {
  const auto ex = sentence(static_cast<std::size_t>(state.range(0)));
  const auto model = additive_model();
  LimeOptions opts;
  opts.n_samples = 500;
  for (auto _ : state) benchmark::DoNotOptimize(lime_importance(*model, ex, opts));
}
BENCHMARK(BM_Lime)->Arg(20)->Arg(60);

void BM_Vote(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::vector<TopKWords> lists;
  for (int m = 0; m < state.range(0); ++m) {
    auto words = kWords;
    std::shuffle(words.begin(), words.end(), gen);
    lists.push_back({"m" + std::to_string(m), {words.begin(), words.begin() + 5}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(vote(lists));
}
BENCHMARK(BM_Vote)->Arg(3)->Arg(7)->Arg(21);

void BM_Tokenize(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < state.range(0); ++i) text += "The theater, in Ohio, wasn't great. ";
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(10)->Arg(1000);

void BM_ParseTriples(benchmark::State& state) {
  std::string raw;
  for (int i = 0; i < state.range(0); ++i) {
    raw += std::to_string(i + 1) + ". The theater | was in | Ohio\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(parse_triples(raw, TaskKind::SentimentBinary));
}
BENCHMARK(BM_ParseTriples)->Arg(10)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
