// Serial reference vs OpenMP kernels. Argument 0 runs serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <cmath>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/design.hpp"
#include "parity_forge/empirical.hpp"
#include "parity_forge/forest.hpp"
#include "parity_forge/rng.hpp"
#include "parity_forge/simulation.hpp"
#include "parity_forge/transform.hpp"

using namespace parity_forge;

namespace {

Execution exec_of(const benchmark::State& s) {
  return s.range(0) ? Execution::parallel : Execution::serial;
}

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel" : "serial"); }

const Dataset& sim_data(std::size_t n) {
  static Dataset d10k = simulate_data({10000, 1});
  static Dataset d100k = simulate_data({100000, 1});
  return n == 10000 ? d10k : d100k;
}

void BM_TransformUnivariate(benchmark::State& state) {
  const Dataset& ds = sim_data(100000);
  DesignBuilder b(ds.rows());
  b.add_column(ds.column("z"));
  b.add_column(ds.column("x1"));
  DesignMatrix design = b.build();
  auto x2 = ds.column("x2").values();
  CondModel m = fit_conditional(Family::poisson, x2, design);
  Ecdf target(x2);
  for (auto _ : state) {
    auto r = transform_univariate(x2, design, m, target, DrawKey{3}, {}, exec_of(state));
    benchmark::DoNotOptimize(r.values.data());
  }
  label(state);
}
BENCHMARK(BM_TransformUnivariate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ChainTransform(benchmark::State& state) {
  const Dataset& ds = sim_data(10000);
  ChainPlan plan = sim_plan({10000, 1, 10}, Mode::mutual);
  for (auto _ : state) {
    auto e = chain_transform(ds, plan, exec_of(state));
    benchmark::DoNotOptimize(e.replicates.data());
  }
  label(state);
}
BENCHMARK(BM_ChainTransform)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimulateData(benchmark::State& state) {
  for (auto _ : state) {
    auto d = simulate_data({100000, 2}, exec_of(state));
    benchmark::DoNotOptimize(d.rows());
  }
  label(state);
}
BENCHMARK(BM_SimulateData)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

struct ForestInput {
  RowMatrix X;
  std::vector<double> y;
};

const ForestInput& forest_input() {
  static ForestInput in = [] {
    const std::size_t n = 4000, p = 6;
    ForestInput f;
    f.X.resize(n, p);
    f.y.resize(n);
    DrawKey k{11};
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < p; ++j) {
        double v = keyed_normal(k.with_step(static_cast<std::uint16_t>(j)), i, 0);
        f.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        s += (j % 2 ? -0.5 : 0.8) * v;
      }
      f.y[i] = keyed_uniform(k.with_step(99), i, 0) < 1 / (1 + std::exp(-s)) ? 1.0 : 0.0;
    }
    return f;
  }();
  return in;
}

void BM_ForestTrain(benchmark::State& state) {
  const auto& in = forest_input();
  ForestParams hp;
  hp.trees = 100;
  for (auto _ : state) {
    auto f = Forest::train(in.X, in.y, hp, 5, {}, exec_of(state));
    benchmark::DoNotOptimize(f.trees().data());
  }
  label(state);
}
BENCHMARK(BM_ForestTrain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto& in = forest_input();
  ForestParams hp;
  hp.trees = 100;
  static Forest f = Forest::train(in.X, in.y, hp, 5);
  for (auto _ : state) {
    auto s = f.predict(in.X, exec_of(state));
    benchmark::DoNotOptimize(s.data());
  }
  label(state);
}
BENCHMARK(BM_ForestPredict)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
