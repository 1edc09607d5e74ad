#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "thmm/charfn.hpp"
#include "thmm/cma_es.hpp"
#include "thmm/hmm_mle.hpp"
#include "thmm/simulator.hpp"
#include "thmm/wasserstein.hpp"

namespace {

thmm::TimeSeries cosine_series(std::size_t n) {
  thmm::CosineModelConfig cfg;
  cfg.n = n;
  cfg.seed = 1;
  return thmm::simulate_cosine(cfg);
}

thmm::HmmParams grid_params(std::size_t r) {
  thmm::HmmParams p;
  for (std::size_t z = 0; z < r; ++z) p.support.push_back(-1.0 + 2.0 * static_cast<double>(z) / static_cast<double>(r - 1));
  p.transition = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), 1.0 / static_cast<double>(r));
  p.noise = {{0.5, 0.5}, {-0.05, 0.05}, {0.1, 0.12}};
  return p;
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto r = static_cast<std::size_t>(state.range(1));
  const auto y = cosine_series(n).y;
  const auto p = grid_params(r);
  for (auto _ : state) benchmark::DoNotOptimize(thmm::forward_backward(p, y, false).loglik);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ForwardBackward)->Args({5000, 10})->Args({20000, 10})->Args({5000, 30});

void BM_EmStep(benchmark::State& state) {
  const auto y = cosine_series(5000).y;
  const auto p = grid_params(static_cast<std::size_t>(state.range(0)));
  const thmm::EmConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(thmm::em_step(p, y, cfg));
}
BENCHMARK(BM_EmStep)->Arg(10)->Arg(20);

void BM_MnCriterionCached(benchmark::State& state) {
  const auto r = static_cast<std::size_t>(state.range(0));
  const thmm::EmpCharFn phi(cosine_series(20000));
  const thmm::MnCriterion crit(phi, thmm::WeightNodes::draw(3), r);
  const auto d = thmm::GridDensity2D::uniform(r);
  for (auto _ : state) benchmark::DoNotOptimize(crit(d));
}
BENCHMARK(BM_MnCriterionCached)->Arg(10)->Arg(20)->Arg(30);

void BM_MnCriterionUncached(benchmark::State& state) {
  const thmm::EmpCharFn phi(cosine_series(5000));
  const auto nodes = thmm::WeightNodes::draw(3, 500);
  const auto d = thmm::GridDensity2D::uniform(10);
  for (auto _ : state) benchmark::DoNotOptimize(thmm::mn_criterion(phi, d, nodes));
}
BENCHMARK(BM_MnCriterionUncached)->Unit(benchmark::kMillisecond);

void BM_W1Grid(benchmark::State& state) {
  const auto r = static_cast<std::size_t>(state.range(0));
  const auto samples = static_cast<std::size_t>(state.range(1));
  const auto fitted = thmm::pair_law(grid_params(r));
  const auto truth = thmm::DiscreteMeasure2D::empirical(thmm::sample_cosine_pairs(0.1, samples, 5));
  for (auto _ : state) benchmark::DoNotOptimize(thmm::w1_2d(fitted, truth, {.max_arcs = 100'000'000}).value);
}
BENCHMARK(BM_W1Grid)->Args({10, 1000})->Args({10, 5000})->Args({20, 5000})->Unit(benchmark::kMillisecond);

void BM_CmaSphere(benchmark::State& state) {
  thmm::CmaConfig cfg;
  cfg.dim = 100;
  cfg.max_evaluations = 5000;
  const thmm::Objective sphere = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  for (auto _ : state) benchmark::DoNotOptimize(thmm::cma_minimize(sphere, cfg).best_value);
}
BENCHMARK(BM_CmaSphere)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
