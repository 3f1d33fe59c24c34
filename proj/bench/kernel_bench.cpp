// Serial references against the OpenMP kernels on inputs large enough to split.

#include <random>

#include <benchmark/benchmark.h>

#include "gazeintent/attention.hpp"
#include "gazeintent/kernels.hpp"

using namespace gazeintent;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (auto& v : m.row(i)) v = u(rng);
  return m;
}

struct VapInput {
  AttentionConfig cfg;
  GazeTrace trace{1};
  std::vector<ObjectId> ids;
  double end = 0.0;
};

// A 40 s window over every board object: wide enough to take the parallel path.
const VapInput& vap_input() {
  static const VapInput in = [] {
    VapInput v;
    v.cfg.window = 40.0;
    v.cfg.samples_per_window = 3000;
    v.trace = GazeTrace(trace_capacity_for(45.0, v.cfg));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 80.0);
    const auto& layout = standard_layout();
    for (int k = 0; k < 45 * 75; ++k) {
      Vec2 c = layout.pattern_cells[static_cast<std::size_t>(k / 40) % layout.pattern_cells.size()];
      v.trace.push({k * v.cfg.frame, {c.x + n(rng), c.y + n(rng)}, k % 50 != 0});
    }
    for (ObjectId id = 0; id < kStockSlots + kPatternCells; ++id) v.ids.push_back(id);
    v.end = 44.0;
    return v;
  }();
  return in;
}

void BM_vaps_serial(benchmark::State& state) {
  const auto& in = vap_input();
  for (auto _ : state) benchmark::DoNotOptimize(compute_vaps_serial(in.trace, in.ids, standard_layout(), in.end, in.cfg));
}

void BM_vaps_parallel(benchmark::State& state) {
  const auto& in = vap_input();
  for (auto _ : state) benchmark::DoNotOptimize(compute_vaps(in.trace, in.ids, standard_layout(), in.end, in.cfg));
}

void BM_gram_serial(benchmark::State& state) {
  auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 600, 1);
  Kernel k{KernelType::Rbf, 0.01};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix_serial(x, k));
}

void BM_gram_parallel(benchmark::State& state) {
  auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 600, 1);
  Kernel k{KernelType::Rbf, 0.01};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(x, k));
}

void BM_decision_serial(benchmark::State& state) {
  auto svs = random_matrix(400, 600, 2);
  auto q = random_matrix(static_cast<std::size_t>(state.range(0)), 600, 3);
  std::vector<double> coef(400, 0.5), out(q.rows());
  Kernel k{KernelType::Rbf, 0.01};
  for (auto _ : state) {
    decision_batch_serial(svs, coef, 0.1, k, q, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_decision_parallel(benchmark::State& state) {
  auto svs = random_matrix(400, 600, 2);
  auto q = random_matrix(static_cast<std::size_t>(state.range(0)), 600, 3);
  std::vector<double> coef(400, 0.5), out(q.rows());
  Kernel k{KernelType::Rbf, 0.01};
  for (auto _ : state) {
    decision_batch(svs, coef, 0.1, k, q, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_vaps_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_vaps_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_gram_serial)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gram_parallel)->Arg(800)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_decision_serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_decision_parallel)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
