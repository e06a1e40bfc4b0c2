#include <benchmark/benchmark.h>

#include "lhsja/random.hpp"
#include "lhsja/wire.hpp"

namespace {

using namespace lhsja;

std::vector<float> payload(std::size_t n) {
  RngStream rng(RngSeed{3});
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform());
  return v;
}

void BM_EncodeRequest(benchmark::State& state) {
  const wire::Request req{wire::Op::kClassify, 42, payload(static_cast<std::size_t>(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(wire::encode_request(req));
}
BENCHMARK(BM_EncodeRequest)->Arg(256)->Arg(4096);

void BM_DecodeRequest(benchmark::State& state) {
  const std::string frame =
      wire::encode_request({wire::Op::kClassify, 42, payload(static_cast<std::size_t>(state.range(0)))});
  for (auto _ : state) benchmark::DoNotOptimize(wire::decode_request(frame));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(frame.size()));
}
BENCHMARK(BM_DecodeRequest)->Arg(256)->Arg(4096);

}  // namespace
