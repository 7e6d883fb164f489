#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "crashrepro/rag_store.hpp"

using namespace crashrepro::rag;

namespace {

std::vector<LabeledReport> synthetic_corpus(std::size_t sentences) {
  static const std::vector<std::string> words = {"tap", "open", "settings", "menu", "scroll", "down", "enter",
                                                 "text", "rotate", "screen", "crash", "button", "list", "search"};
  std::mt19937 rng(1);
  std::uniform_int_distribution<std::size_t> w(0, words.size() - 1);
  LabeledReport r{"bench", "app", {}};
  for (std::size_t i = 0; i < sentences; ++i) {
    std::string s;
    for (int k = 0; k < 8; ++k) s += (k ? " " : "") + words[w(rng)];
    r.sentences.push_back({s, {}});
  }
  return {r};
}

void BM_Embed(benchmark::State& state) {
  HashedTrigramProvider p;
  const std::string s = "Go to the settings screen and set the API URL to xxyyzz.";
  for (auto _ : state) benchmark::DoNotOptimize(embed(s, p));
}
BENCHMARK(BM_Embed);

void BM_Retrieve(benchmark::State& state) {
  HashedTrigramProvider p;
  const auto index = RagIndex::build(synthetic_corpus(static_cast<std::size_t>(state.range(0))), p);
  const auto q = embed("scroll down the settings list and tap the button", p);
  for (auto _ : state) benchmark::DoNotOptimize(index.retrieve_vector(q, 5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Retrieve)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

}  // namespace
