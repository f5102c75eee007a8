#include <benchmark/benchmark.h>

#include "tsrkit/decoder.hpp"
#include "tsrkit/interpmap.hpp"
#include "tsrkit/losses.hpp"
#include "tsrkit/metrics.hpp"
#include "tsrkit/synth.hpp"
#include "tsrkit/targets.hpp"
#include "tsrkit/teds.hpp"

using namespace tsrkit;

namespace {

TableAnnotation table(std::uint64_t seed, int size) {
  SynthConfig cfg = harness_config(seed, size, size);
  cfg.rows = {10, 12};
  cfg.cols = {8, 10};
  return gen_table(cfg);
}

void BM_InterpolatePolygons(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const TableAnnotation ann = table(2, size);
  const auto polys = build_row_polygons(ann);
  for (auto _ : state) benchmark::DoNotOptimize(interpolate_polygons(polys, size, size));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(size) * size);
}
BENCHMARK(BM_InterpolatePolygons)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_AssembleTargets(benchmark::State& state) {
  const TableAnnotation ann = table(3, 1024);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_target_bundle(ann, LossConfig{}));
}
BENCHMARK(BM_AssembleTargets)->Unit(benchmark::kMillisecond);

void BM_DecodeTable(benchmark::State& state) {
  const RawNetworkOutput raw = render_oracle(table(static_cast<std::uint64_t>(state.range(0)), 1024));
  for (auto _ : state) benchmark::DoNotOptimize(decode_table(raw));
}
BENCHMARK(BM_DecodeTable)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_OverallLoss(benchmark::State& state) {
  const TargetBundle target = assemble_target_bundle(table(6, 1024), LossConfig{});
  const RawNetworkOutput pred = targets_as_output(target);
  for (auto _ : state) benchmark::DoNotOptimize(overall_loss(pred, target, LossConfig{}));
}
BENCHMARK(BM_OverallLoss)->Unit(benchmark::kMillisecond);

void BM_Teds(benchmark::State& state) {
  const StructureTree a = to_structure_tree(table(4, 1024));
  const StructureTree b = to_structure_tree(table(5, 1024));
  for (auto _ : state) benchmark::DoNotOptimize(teds(a, b));
  state.counters["nodes"] = a.size() + b.size();
}
BENCHMARK(BM_Teds)->Unit(benchmark::kMillisecond);

void BM_AdjacencyPrf(benchmark::State& state) {
  const TableAnnotation gt = table(7, 1024);
  for (auto _ : state) benchmark::DoNotOptimize(adjacency_prf(gt, gt, 0.5));
}
BENCHMARK(BM_AdjacencyPrf)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
