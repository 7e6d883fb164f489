#include <benchmark/benchmark.h>

#include <string>

#include "crashrepro/action_command.hpp"
#include "crashrepro/s2r.hpp"

namespace {

const std::string kChatty = R"(**Suggestion:**
1. **Explore the "Licenses" section**: Check for relevant options.
  [{"action": "click", "feature": "Licenses"}]
2. **Scroll down** if no options are found.
  [{"action": "scroll", "target_direction": "down"}]
3. **Back to main screen** if needed.
  [{"action": "back"}])";

void BM_FilterPayload(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(crashrepro::filter_json_payload(kChatty));
}
BENCHMARK(BM_FilterPayload);

void BM_FilterAndParse(benchmark::State& state) {
  for (auto _ : state) {
    auto p = crashrepro::filter_json_payload(kChatty);
    benchmark::DoNotOptimize(crashrepro::parse_action_sequence(*p));
  }
}
BENCHMARK(BM_FilterAndParse);

void BM_ParseExtraction(benchmark::State& state) {
  const std::string reply =
      "Sentence 2:\n1. [Tap] [settings screen]\n2. [Input] [API URL] [xxyyzz]\nSentence 3:\n3. [Tap] [OK]\n"
      "Sentence 4:\n4. [Tap] [REFRESH]\n";
  for (auto _ : state) benchmark::DoNotOptimize(crashrepro::s2r::parse_extraction_response(reply));
}
BENCHMARK(BM_ParseExtraction);

}  // namespace
