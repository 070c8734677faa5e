// Parallel kernels against their serial references on synthetic inputs.
// Thread count follows VESSEL4D_THREADS.
#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "vessel4d/coherence.hpp"
#include "vessel4d/eval.hpp"
#include "vessel4d/metrics.hpp"
#include "vessel4d/parallel.hpp"
#include "vessel4d/pipeline.hpp"
#include "vessel4d/reference.hpp"
#include "vessel4d/synth.hpp"

using namespace vessel4d;

namespace {

struct Scene {
  GroundTruth gt;
  ClusterAssignment assignment;
  EdgeGraph graph;
  DisplacementField field;
};

// Built once per (points, frames) and shared across benchmarks.
const Scene& scene(std::size_t points, std::size_t frames) {
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Scene>> cache;
  auto& slot = cache[{points, frames}];
  if (!slot) {
    SynthConfig c;
    c.point_count = points;
    c.frame_count = frames;
    c.noise_sigma_mm = 0.05;
    slot = std::make_unique<Scene>();
    slot->gt = generate(c);
    const PipelineConfig cfg;
    slot->assignment = stage_cluster(slot->gt.sequence, cfg);
    slot->graph = stage_graph(slot->gt.sequence, slot->assignment, cfg);
    slot->field = displacement_from_graph(slot->graph);
  }
  return *slot;
}

PointCloud jittered(const PointCloud& base) {
  PointCloud out = base;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += Vec3(0.01 * static_cast<double>(i % 7), 0.02, -0.01);
  return out;
}

void BM_nearest_kdtree(benchmark::State& state) {
  const auto& s = scene(static_cast<std::size_t>(state.range(0)), 2);
  const auto p = s.gt.sequence.positions(1), g = jittered(p);
  for (auto _ : state) benchmark::DoNotOptimize(nearest_distances(p, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.size()));
}

void BM_nearest_brute(benchmark::State& state) {
  const auto& s = scene(static_cast<std::size_t>(state.range(0)), 2);
  const auto p = s.gt.sequence.positions(1), g = jittered(p);
  for (auto _ : state) benchmark::DoNotOptimize(reference::nearest_distances(p, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.size()));
}

void BM_centroids_parallel(benchmark::State& state) {
  const auto& s = scene(5000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(track_centroids(s.gt.sequence, s.assignment));
}

void BM_centroids_reference(benchmark::State& state) {
  const auto& s = scene(5000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::track_centroids(s.gt.sequence, s.assignment));
}

void BM_smooth_parallel(benchmark::State& state) {
  const auto& s = scene(5000, static_cast<std::size_t>(state.range(0)));
  CoherenceParams p;
  p.iterations = 3;
  for (auto _ : state) benchmark::DoNotOptimize(smooth_field(s.field, s.graph, p));
}

void BM_smooth_reference(benchmark::State& state) {
  const auto& s = scene(5000, static_cast<std::size_t>(state.range(0)));
  CoherenceParams p;
  p.iterations = 3;
  for (auto _ : state) benchmark::DoNotOptimize(reference::smooth_field(s.field, s.graph, p));
}

void BM_stress_parallel(benchmark::State& state) {
  const auto& s = scene(5000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(edge_stress(s.graph.edges, s.graph.centroids, s.graph.vertex_count(), 0.3833));
  }
}

void BM_stress_reference(benchmark::State& state) {
  const auto& s = scene(5000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::edge_stress(s.graph.edges, s.graph.centroids, s.graph.vertex_count(), 0.3833));
  }
}

}  // namespace

BENCHMARK(BM_nearest_kdtree)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_nearest_brute)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_centroids_parallel)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_centroids_reference)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_smooth_parallel)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_smooth_reference)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_stress_parallel)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_stress_reference)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
  apply_thread_limit_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
