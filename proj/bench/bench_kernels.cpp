// OpenMP kernels against their serial references, plus one full model step.
// Thread count follows TCM_THREADS / OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tcm/data.hpp"
#include "tcm/kernels.hpp"
#include "tcm/littlewood_paley.hpp"
#include "tcm/model.hpp"

namespace {

using tcm::kernels::cplx;

struct Arrays {
  std::vector<cplx> a, b, out;
  std::vector<double> w, x, y, acc;
  std::vector<std::int8_t> lo;

  explicit Arrays(std::size_t n) : a(n), b(n), out(n), w(n), x(n), y(n), acc(n), lo(n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = {g(rng), g(rng)};
      b[i] = {g(rng), g(rng)};
      w[i] = u(rng);
      x[i] = g(rng);
      y[i] = g(rng);
      lo[i] = static_cast<std::int8_t>(rng() % 6) - 1;
    }
  }
};

template <bool Parallel>
void BM_Scale(benchmark::State& st) {
  Arrays d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel) tcm::kernels::scale(d.a, d.w, d.out);
    else tcm::kernels::serial::scale(d.a, d.w, d.out);
    benchmark::DoNotOptimize(d.out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_AccumulateProduct(benchmark::State& st) {
  Arrays d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel) tcm::kernels::accumulate_product(d.x, d.y, d.acc);
    else tcm::kernels::serial::accumulate_product(d.x, d.y, d.acc);
    benchmark::DoNotOptimize(d.acc.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_WeightedEnergy(benchmark::State& st) {
  Arrays d(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    double e = Parallel ? tcm::kernels::weighted_energy(d.a, d.w)
                        : tcm::kernels::serial::weighted_energy(d.a, d.w);
    benchmark::DoNotOptimize(e);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_BlockEnergies(benchmark::State& st) {
  Arrays d(static_cast<std::size_t>(st.range(0)));
  std::vector<double> energies(8);
  for (auto _ : st) {
    std::fill(energies.begin(), energies.end(), 0.0);
    if constexpr (Parallel) tcm::kernels::block_energies(d.a, d.lo, d.w, energies);
    else tcm::kernels::serial::block_energies(d.a, d.lo, d.w, energies);
    benchmark::DoNotOptimize(energies.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ModelStep(benchmark::State& st) {
  const tcm::Grid grid(2, static_cast<int>(st.range(0)));
  const auto init = tcm::data::generate_data({tcm::data::Family::RandomBesov, 1e-2, 3}, grid, 1.0);
  const tcm::model::Stepper stepper(grid, {1.0, 1.0, 1.0});
  for (auto _ : st) {
    auto y = stepper.step(init.state, 1e-3);
    benchmark::DoNotOptimize(y.theta.coeffs().data());
  }
}

void BM_BlockNorms(benchmark::State& st) {
  const tcm::Grid grid(2, static_cast<int>(st.range(0)));
  const auto init = tcm::data::generate_data({tcm::data::Family::RandomBesov, 1e-2, 3}, grid, 1.0);
  const tcm::lp::DyadicPartition part(grid);
  for (auto _ : st) {
    auto b = tcm::lp::block_norms(init.state.u, part);
    benchmark::DoNotOptimize(b.data());
  }
}

constexpr std::int64_t kSmall = 1 << 12, kLarge = 1 << 20;

}  // namespace

BENCHMARK_TEMPLATE(BM_Scale, true)->Name("scale/omp")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_Scale, false)->Name("scale/serial")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_AccumulateProduct, true)->Name("accumulate_product/omp")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_AccumulateProduct, false)->Name("accumulate_product/serial")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_WeightedEnergy, true)->Name("weighted_energy/omp")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_WeightedEnergy, false)->Name("weighted_energy/serial")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_BlockEnergies, true)->Name("block_energies/omp")->Range(kSmall, kLarge);
BENCHMARK_TEMPLATE(BM_BlockEnergies, false)->Name("block_energies/serial")->Range(kSmall, kLarge);
BENCHMARK(BM_ModelStep)->Name("model_step")->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_BlockNorms)->Name("block_norms")->Arg(64)->Arg(256);

int main(int argc, char** argv) {
  tcm::kernels::configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
