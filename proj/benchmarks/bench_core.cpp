// Microbenchmarks for the layers and channel ops that dominate training time.
// Shapes mirror the real workloads: batch 64, the Table I layer sizes.

#include <benchmark/benchmark.h>

#include "mtoc/channel.hpp"
#include "mtoc/model.hpp"
#include "mtoc/nn.hpp"
#include "mtoc/rng.hpp"

using namespace mtoc;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.flat()) v = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_DenseForward(benchmark::State& state) {
    Rng rng(1);
    const int in_w = static_cast<int>(state.range(0));
    const int out_w = static_cast<int>(state.range(1));
    Tensor x = random_tensor({64, in_w}, rng);
    Tensor w = random_tensor({in_w, out_w}, rng);
    Tensor b = random_tensor({out_w}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(dense_forward(x, w, b));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_DenseForward)->Args({784, 256})->Args({256, 128})->Args({128, 20});

void BM_Conv2DForward(benchmark::State& state) {
    Rng rng(2);
    Tensor x = random_tensor({8, 28, 28, 1}, rng);
    Tensor k = random_tensor({3, 3, 1, 32}, rng);
    Tensor b = random_tensor({32}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, k, b));
    state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Conv2DForward);

void BM_MaxPool2DForward(benchmark::State& state) {
    Rng rng(3);
    Tensor x = random_tensor({8, 26, 26, 32}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(maxpool2d_forward(x, 2, 2));
    state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_MaxPool2DForward);

void BM_EncoderForwardBackward(benchmark::State& state) {
    Rng rng(4);
    Network enc = build_encoder(ConfigId::MNIST_FNN, 20);
    enc.init_params(rng);
    Tensor x = random_tensor({64, 28, 28, 1}, rng);
    Tensor upstream = random_tensor({64, 20}, rng);
    for (auto _ : state) {
        enc.forward(x);
        benchmark::DoNotOptimize(enc.backward(upstream));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_EncoderForwardBackward);

void BM_ChannelForward(benchmark::State& state) {
    Rng rng(5);
    Tensor z = random_tensor({64, 20}, rng);
    ChannelConfig cfg;
    Rng crng(6);
    for (auto _ : state) benchmark::DoNotOptimize(channel_forward(z, cfg, crng));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_ChannelForward);

void BM_RayleighSample(benchmark::State& state) {
    Rng rng(7);
    for (auto _ : state) benchmark::DoNotOptimize(rayleigh_sample(rng, 10000));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_RayleighSample);

void BM_PowerNormalize(benchmark::State& state) {
    Rng rng(8);
    Tensor z = random_tensor({64, 20}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(power_normalize(z));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_PowerNormalize);

}  // namespace

BENCHMARK_MAIN();
