#include <benchmark/benchmark.h>

#include "amnet/losses.hpp"
#include "amnet/ops.hpp"
#include "amnet/rng.hpp"

using namespace amnet;

namespace {

Tensor randn(std::vector<std::int64_t> shape, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

}  // namespace

static void BM_Conv1dPointwise(benchmark::State& state) {
    const std::int64_t c = state.range(0);
    const Tensor x = randn({8, c, 400}, 1);
    const Tensor w = randn({c, c, 1}, 2);
    for (auto _ : state) {
        Tensor y = conv1d(x, w, nullptr, 1, 0, 1);
        benchmark::DoNotOptimize(y.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 8 * c * c * 400);
}
BENCHMARK(BM_Conv1dPointwise)->Arg(32)->Arg(96)->Arg(192);

static void BM_Conv1dDepthwise(benchmark::State& state) {
    const std::int64_t c = state.range(0);
    const Tensor x = randn({8, c, 400}, 3);
    const Tensor w = randn({c, 1, 3}, 4);
    for (auto _ : state) {
        Tensor y = conv1d(x, w, nullptr, 1, 1, static_cast<int>(c));
        benchmark::DoNotOptimize(y.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 8 * c * 3 * 400);
}
BENCHMARK(BM_Conv1dDepthwise)->Arg(32)->Arg(96)->Arg(192);

static void BM_Conv1dBackward(benchmark::State& state) {
    const std::int64_t c = state.range(0);
    Tensor x = randn({8, c, 400}, 5);
    x.set_requires_grad(true);
    Tensor w = randn({c, c, 1}, 6);
    w.set_requires_grad(true);
    for (auto _ : state) {
        Tape tape;
        Tensor y = conv1d(x, w, nullptr, 1, 0, 1, &tape);
        Tensor loss = sum(y, &tape);
        tape.backward(loss);
        x.zero_grad();
        w.zero_grad();
        benchmark::DoNotOptimize(loss.item());
    }
}
BENCHMARK(BM_Conv1dBackward)->Arg(32)->Arg(96);

static void BM_BatchNormTrain(benchmark::State& state) {
    const Tensor x = randn({16, 64, 400}, 7);
    const Tensor gamma = Tensor::full({64}, 1.0);
    const Tensor beta = Tensor::zeros({64});
    Tensor rm = Tensor::zeros({64});
    Tensor rv = Tensor::full({64}, 1.0);
    for (auto _ : state) {
        Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-5);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_BatchNormTrain);

static void BM_AmSoftmaxLoss(benchmark::State& state) {
    Tensor features = randn({128, 1280}, 8);
    features.set_requires_grad(true);
    Tensor weight = randn({462, 1280}, 9);
    weight.set_requires_grad(true);
    std::vector<int> targets(128);
    Rng rng(10);
    for (int& t : targets) t = static_cast<int>(rng.below(462));
    const AmSoftmaxParams params{30.0, 0.5, 1e-11};
    for (auto _ : state) {
        Tape tape;
        Tensor loss = am_softmax_loss(features, weight, targets, params, &tape);
        tape.backward(loss);
        features.zero_grad();
        weight.zero_grad();
        benchmark::DoNotOptimize(loss.item());
    }
}
BENCHMARK(BM_AmSoftmaxLoss);
