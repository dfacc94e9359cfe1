#include <benchmark/benchmark.h>

#include "synthdebias/debias.hpp"
#include "synthdebias/dgp.hpp"
#include "synthdebias/estimators.hpp"
#include "synthdebias/generators.hpp"

using namespace synthdebias;

namespace {

const Table& training() {
  static const Table t = [] {
    Rng rng(7);
    return sample_dgp(500, DgpParams{}, rng);
  }();
  return t;
}

const char* const kGenerators[] = {"parametric", "smoothed_bootstrap:bandwidth=3",
                                   "gaussian_copula"};

void BM_DgpSample(benchmark::State& state) {
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_dgp(state.range(0), DgpParams{}, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DgpSample)->Arg(1000)->Arg(100000);

void BM_GeneratorFit(benchmark::State& state) {
  const auto spec = GeneratorSpec::parse(kGenerators[state.range(0)]);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_generator(spec, training(), rng));
  state.SetLabel(kGenerators[state.range(0)]);
}
BENCHMARK(BM_GeneratorFit)->DenseRange(0, 2);

void BM_GeneratorSample(benchmark::State& state) {
  Rng rng(3);
  const auto gen = fit_generator(GeneratorSpec::parse(kGenerators[state.range(0)]), training(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(gen->sample(100000, rng));
  state.SetItemsProcessed(state.iterations() * 100000);
  state.SetLabel(kGenerators[state.range(0)]);
}
BENCHMARK(BM_GeneratorSample)->DenseRange(0, 2);

void BM_ConditionalSample(benchmark::State& state) {
  Rng rng(4);
  const auto gen = fit_generator(GeneratorSpec::parse(kGenerators[state.range(0)]), training(), rng);
  const Assignment stage_iii{{"stage", 2}};
  for (auto _ : state) benchmark::DoNotOptimize(sample_conditional(*gen, stage_iii, 10000, rng));
  state.SetLabel(kGenerators[state.range(0)]);
}
BENCHMARK(BM_ConditionalSample)->DenseRange(0, 2);

void BM_LincoefCrossFit(benchmark::State& state) {
  Rng rng(5);
  const Table t = sample_dgp(state.range(0), DgpParams{}, rng);
  const auto spec = EstimandSpec::parse("lincoef:bp~therapy|stage");
  for (auto _ : state) benchmark::DoNotOptimize(estimate(t, spec, Method::kEic, 5, rng));
}
BENCHMARK(BM_LincoefCrossFit)->Arg(500)->Arg(100000);

void BM_DebiasMean(benchmark::State& state) {
  Rng rng(6);
  const auto gen = fit_generator(GeneratorSpec::parse("parametric"), training(), rng);
  DebiasOptions options;
  options.k_large = 100000;
  options.verify = false;
  for (auto _ : state) benchmark::DoNotOptimize(debias_mean(gen, training(), "age", options, rng));
}
BENCHMARK(BM_DebiasMean);

void BM_DebiasRegression(benchmark::State& state) {
  Rng rng(8);
  const auto gen = fit_generator(GeneratorSpec::parse("parametric"), training(), rng);
  const auto spec = EstimandSpec::parse("lincoef:bp~therapy|stage");
  DebiasOptions options;
  options.k_large = 100000;
  options.k_cond = 10000;
  options.verify = false;
  for (auto _ : state) benchmark::DoNotOptimize(debias_regression(gen, training(), spec, options, rng));
}
BENCHMARK(BM_DebiasRegression);

}  // namespace

BENCHMARK_MAIN();
