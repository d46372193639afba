#include <benchmark/benchmark.h>

#include <random>

#include "hdapprox/encoders.hpp"
#include "reference/reference_encoder.hpp"

namespace {

using namespace hdapprox;

struct Workload {
  LevelTable levels;
  IdTable ids;
  std::vector<std::uint16_t> batch;
  std::size_t rows;
};

Workload make_workload(std::size_t rows, std::size_t features, std::size_t dim) {
  Rng lr = make_stream(1, Stream::levels);
  Rng ir = make_stream(1, Stream::ids);
  Workload w{LevelTable::generate(dim, 16, lr), IdTable::generate(dim, features, ir), {}, rows};
  std::mt19937_64 rng(1);
  w.batch.resize(rows * features);
  for (auto& x : w.batch) x = static_cast<std::uint16_t>(rng() % 16);
  return w;
}

EncoderSpec spec_at(std::int64_t i) { return standard_encoders()[static_cast<std::size_t>(i)]; }

void BM_EncodeBatch(benchmark::State& state, Execution exec) {
  const Workload w = make_workload(64, 617, 2048);
  const EncoderSpec spec = spec_at(state.range(0));
  const EncoderConfig cfg = make_encoder_config(spec, 2048, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_batch(w.batch, w.rows, w.levels, w.ids, cfg, exec));
  }
  state.SetLabel(spec.name());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.rows));
}

void BM_EncodeSerial(benchmark::State& state) { BM_EncodeBatch(state, Execution::serial); }
void BM_EncodeParallel(benchmark::State& state) { BM_EncodeBatch(state, Execution::parallel); }

void BM_EncodeReference(benchmark::State& state) {
  const Workload w = make_workload(1, 617, 2048);
  const EncoderSpec spec = spec_at(state.range(0));
  const EncoderConfig cfg = make_encoder_config(spec, 2048, 1);
  for (auto _ : state) benchmark::DoNotOptimize(reference::encode(w.batch, w.levels, w.ids, cfg));
  state.SetLabel(spec.name());
  state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_EncodeSerial)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EncodeParallel)->DenseRange(0, 5)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EncodeReference)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
