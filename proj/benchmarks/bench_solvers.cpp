#include "pfqr/evalbench.hpp"
#include "pfqr/extract.hpp"
#include "pfqr/qsolve.hpp"
#include "pfqr/simgen.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using pfqr::Index;
using pfqr::MatrixXd;
using pfqr::VectorXd;

MatrixXd gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

pfqr::FunctionalSample sim1(Index n) {
  pfqr::Sim1Design d;
  d.n = n;
  return pfqr::gen_sim1(d).sample;
}

void BM_FitQr(benchmark::State& state) {
  const Index n = state.range(0);
  const Index p = state.range(1);
  MatrixXd x(n, p + 1);
  x << VectorXd::Ones(n), gaussian(n, p, 1);
  const VectorXd y = x.rowwise().sum() + gaussian(n, 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(pfqr::fit_qr(x, y, 0.5).objective);
}
BENCHMARK(BM_FitQr)->Args({100, 1})->Args({500, 1})->Args({500, 4})->Args({2000, 4});

void BM_FitCqr(benchmark::State& state) {
  const Index n = state.range(0);
  const auto levels = pfqr::CheckLossSpec::composite_uniform(static_cast<int>(state.range(1))).levels();
  const MatrixXd x = gaussian(n, 1, 3);
  const VectorXd y = x.col(0) + gaussian(n, 1, 4).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(pfqr::fit_cqr(x, y, levels).objective);
}
BENCHMARK(BM_FitCqr)->Args({100, 3})->Args({100, 9})->Args({500, 9});

void BM_ExtractOne(benchmark::State& state) {
  const pfqr::FunctionalSample s = pfqr::standardize_columns(sim1(state.range(0))).sample;
  const pfqr::CheckLossSpec loss = state.range(1) == 0   ? pfqr::CheckLossSpec::least_squares()
                                   : state.range(1) == 1 ? pfqr::CheckLossSpec::quantile(0.5)
                                                         : pfqr::CheckLossSpec::composite_uniform(9);
  for (auto _ : state) benchmark::DoNotOptimize(pfqr::extract_one(s, loss).raw_norm);
  state.SetLabel(loss.label());
}
BENCHMARK(BM_ExtractOne)->Args({100, 0})->Args({100, 1})->Args({100, 2})->Args({500, 1})->Unit(benchmark::kMillisecond);

void BM_Sim1Replication(benchmark::State& state) {
  pfqr::BenchmarkConfig c;
  c.sample_sizes = {state.range(0)};
  c.replications = 1;
  c.mse_mode = pfqr::MseMode::InSample;
  for (auto _ : state) benchmark::DoNotOptimize(pfqr::run_benchmark(c).cells.size());
}
BENCHMARK(BM_Sim1Replication)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
