#include <benchmark/benchmark.h>

#include "lhsja/hsja.hpp"
#include "lhsja/latent_attack.hpp"
#include "lhsja/sweep.hpp"
#include "lhsja/synthetic.hpp"

namespace {

using namespace lhsja;

DecisionOracle plane_oracle(const Vector& a, double c) {
  return {[a, c](const Vector& x) { return dot(a, x) >= c; }, false};
}

void BM_BinarySearch(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  RngStream rng(RngSeed{1});
  const Vector a = sample_unit_sphere(dim, rng);
  const Vector x_src = Vector::filled(dim, 0.0);
  const Vector x_adv = scale(a, 2.0);
  const DecisionOracle d = plane_oracle(a, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(binary_search_boundary(d, x_adv, x_src, 1e-3));
}
BENCHMARK(BM_BinarySearch)->Arg(8)->Arg(256)->Arg(4096);

void BM_GradientEstimate(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto batch = static_cast<std::size_t>(state.range(1));
  RngStream rng(RngSeed{2});
  const Vector a = sample_unit_sphere(dim, rng);
  const Vector x_b = Vector::filled(dim, 0.0);
  const DecisionOracle d = plane_oracle(a, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_gradient_direction(d, x_b, 1e-2, batch, rng, {-10.0, 10.0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_GradientEstimate)->Args({8, 100})->Args({64, 283})->Args({256, 1000});

/// Full latent-space attack on the default synthetic suite.
void BM_LatentAttack(benchmark::State& state) {
  static const SyntheticSuite suite = make_suite(SuiteParams{});
  static const LatentNormalizer norm = LatentNormalizer::calibrate(*suite.generator, *suite.encoder);
  static const std::vector<SweepPair> pairs = make_sweep_pairs(suite, 1, 0);
  AttackConfig cfg;
  cfg.max_queries = static_cast<std::uint64_t>(state.range(0));
  const LatentAttackJob job{pairs[0].x_src, pairs[0].x_trg, pairs[0].target, cfg, suite.oracles(), norm, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(latent_hsja(job));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LatentAttack)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_ImageAttack(benchmark::State& state) {
  static const SyntheticSuite suite = make_suite(SuiteParams{});
  static const std::vector<SweepPair> pairs = make_sweep_pairs(suite, 1, 0);
  AttackConfig cfg;
  cfg.max_queries = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(image_hsja_baseline(pairs[0].x_src, pairs[0].x_trg, pairs[0].target, *suite.classifier, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ImageAttack)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
