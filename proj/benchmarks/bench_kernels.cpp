#include <benchmark/benchmark.h>

#include "kru/cells.hpp"
#include "kru/kron.hpp"
#include "kru/rng.hpp"
#include "kru/tasks.hpp"
#include "kru/training.hpp"

namespace {

constexpr std::size_t kBatch = 32;

kru::Matrix random_input(std::size_t rows, std::size_t cols, kru::Field field) {
  kru::Rng rng(3, kru::Stream::probe);
  kru::Matrix x(rows, cols, field);
  for (auto& v : x.data()) v = kru::Complex(rng.normal(), field == kru::Field::complex ? rng.normal() : 0.0);
  return x;
}

void BM_DenseMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_input(kBatch, n, kru::Field::complex);
  const auto w = kru::random_unitary(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kru::matmul(kru::Op::none, x, kru::Op::trans, w));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DenseMatmul)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_KronApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_input(kBatch, n, kru::Field::complex);
  const auto w = kru::random_unitary_factors(kru::auto_2x2_shapes(n), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kru::kron_apply(x, w));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KronApply)->RangeMultiplier(2)->Range(64, 4096)->Complexity(benchmark::oNLogN);

void BM_KronForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_input(kBatch, n, kru::Field::complex);
  const auto gy = random_input(kBatch, n, kru::Field::complex);
  const auto w = kru::random_unitary_factors(kru::auto_2x2_shapes(n), 1);
  for (auto _ : state) {
    auto [y, cache] = kru::kron_forward(x, w);
    benchmark::DoNotOptimize(kru::kron_backward(x, w, cache, gy));
  }
}
BENCHMARK(BM_KronForwardBackward)->RangeMultiplier(4)->Range(64, 1024);

// One full BPTT update on the adding task, T = 100.
void BM_AddingUpdate(benchmark::State& state) {
  kru::CellShape shape;
  shape.kind = state.range(0) == 0 ? kru::CellKind::rnn : kru::CellKind::kru;
  shape.field = kru::Field::complex;
  shape.activation = kru::Activation::modrelu;
  shape.input_dim = 2;
  shape.hidden_dim = static_cast<std::size_t>(state.range(1));
  shape.output_dim = 1;
  const auto p = kru::init_parameters(shape, 1);
  const auto batch = kru::gen_adding_batch(100, 20, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(kru::bptt_loss_and_grads(p, batch, {}));
}
BENCHMARK(BM_AddingUpdate)->ArgsProduct({{0, 1}, {64, 128}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
