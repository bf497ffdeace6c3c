#include <benchmark/benchmark.h>

#include <lpae/model.hpp>
#include <lpae/optim.hpp>
#include <lpae/pyramid.hpp>
#include <lpae/train.hpp>

using namespace lpae;

namespace {

Tensor random_input(Rng& rng, Shape s) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.uniform();
  return t;
}

void BM_ConvForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  ConvLayer layer = ConvLayer::conv3x3(16, 16);
  xavier_init(layer, rng);
  const Tensor x = random_input(rng, Shape{4, 16, side, side});
  for (auto _ : state) benchmark::DoNotOptimize(conv_forward(layer, x));
  state.SetItemsProcessed(state.iterations() * 4 * 16 * 16 * 9 * side * side);
}
BENCHMARK(BM_ConvForward)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_ConvBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  ConvLayer layer = ConvLayer::conv3x3(16, 16);
  xavier_init(layer, rng);
  const Tensor x = random_input(rng, Shape{4, 16, side, side});
  const Tensor g = random_input(rng, Shape{4, 16, side, side});
  for (auto _ : state) benchmark::DoNotOptimize(conv_backward(layer, x, g));
  state.SetItemsProcessed(state.iterations() * 2 * 4 * 16 * 16 * 9 * side * side);
}
BENCHMARK(BM_ConvBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_TconvForward(benchmark::State& state) {
  Rng rng(3);
  ConvLayer layer = ConvLayer::transposed4x4(16, 16);
  xavier_init(layer, rng);
  const Tensor x = random_input(rng, Shape{4, 16, 32, 32});
  for (auto _ : state) benchmark::DoNotOptimize(layer_forward(layer, x));
}
BENCHMARK(BM_TconvForward)->Unit(benchmark::kMicrosecond);

void BM_LpaeTrainStep(benchmark::State& state) {
  Rng rng(4);
  LpaeParams params = LpaeParams::xavier(rng);
  const Tensor batch = random_input(rng, Shape{4, 3, 64, 64});
  TrainConfig cfg;
  Optimizer opt(cfg);
  for (auto _ : state) {
    LpaeParams grads = params.zeros_like();
    benchmark::DoNotOptimize(lpae_loss_and_grads(params, batch, cfg.lpae_weights, grads));
    opt.step(params.params(), grads.params(), 1e-4);
  }
}
BENCHMARK(BM_LpaeTrainStep)->Unit(benchmark::kMillisecond);

void BM_LpBuild(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  const Tensor img = random_input(rng, Shape{1, 3, side, side});
  for (auto _ : state) benchmark::DoNotOptimize(lp_build(img, 3));
  state.SetBytesProcessed(state.iterations() * img.numel() * sizeof(double));
}
BENCHMARK(BM_LpBuild)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_BicubicDownUp(benchmark::State& state) {
  Rng rng(6);
  const Tensor img = random_input(rng, Shape{1, 3, 256, 256});
  for (auto _ : state) benchmark::DoNotOptimize(bicubic_up2(bicubic_down2(img)));
}
BENCHMARK(BM_BicubicDownUp)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
