#include <benchmark/benchmark.h>

#include <memory>
#include <string>

#include "crashrepro/device.hpp"
#include "crashrepro/simulator.hpp"
#include "crashrepro/utg.hpp"

using namespace crashrepro;

namespace {

// A list screen with `n` rows, each a clickable row holding two labels.
device::UiElement list_screen(int n) {
  device::UiElement root;
  root.element_id = "root";
  root.class_name = "android.widget.FrameLayout";
  root.bounds = {0, 0, 1080, 100 * n + 100};
  for (int i = n - 1; i >= 0; --i) {
    device::UiElement row;
    row.element_id = "row" + std::to_string(i);
    row.class_name = "android.widget.LinearLayout";
    row.clickable = true;
    row.bounds = {0, 100 * i, 1080, 100 * i + 90};
    for (int k = 0; k < 2; ++k) {
      device::UiElement label;
      label.element_id = row.element_id + "_" + std::to_string(k);
      label.class_name = "android.widget.TextView";
      label.text = "Item " + std::to_string(i) + (k ? " subtitle" : "");
      label.bounds = {540 * k, 100 * i, 540 * k + 540, 100 * i + 90};
      row.children.push_back(label);
    }
    root.children.push_back(row);
  }
  return root;
}

void BM_Fingerprint(benchmark::State& state) {
  const auto root = list_screen(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(device::compute_state_id("ListActivity", root));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fingerprint)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_EncodeScreen(benchmark::State& state) {
  const auto s = device::make_state("ListActivity", list_screen(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(device::encode_state_text(s));
}
BENCHMARK(BM_EncodeScreen)->Arg(16)->Arg(256);

void BM_ResolveSubstring(benchmark::State& state) {
  const auto s = device::make_state("ListActivity", list_screen(256));
  for (auto _ : state) benchmark::DoNotOptimize(&device::resolve_feature(s, "item 255 sub"));
}
BENCHMARK(BM_ResolveSubstring);

void BM_ExploreFixture(benchmark::State& state) {
  const auto spec =
      std::make_shared<const sim::SimAppSpec>(sim::load_spec(std::string(CRASHREPRO_DATA_DIR) + "/apps/hidden_about.json"));
  utg::ExploreOptions opts;
  opts.depth = 3;
  for (auto _ : state) {
    sim::SimDevice dev(spec);
    benchmark::DoNotOptimize(utg::explore(dev, dev.capture_state(), opts));
  }
}
BENCHMARK(BM_ExploreFixture);

}  // namespace
