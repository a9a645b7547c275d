#include <benchmark/benchmark.h>

#include "amnet/model.hpp"
#include "amnet/rng.hpp"

using namespace amnet;

namespace {

Tensor random_frames(int batch, int window, std::uint64_t seed) {
    Tensor t({batch, 1, window});
    Rng rng(seed);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

void forward_preset(benchmark::State& state, const char* preset, int classes, int window) {
    ModelConfig cfg = preset_config(preset);
    cfg.num_classes = classes;
    cfg.window_samples = window;
    Model model = build_mobilenet1d(cfg, 1234);
    const Tensor frames = random_frames(static_cast<int>(state.range(0)), window, 7);
    for (auto _ : state) {
        Tensor out = model.forward(frames, Mode::eval);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

static void BM_ForwardDesk(benchmark::State& state) { forward_preset(state, "desk", 10, 3200); }
BENCHMARK(BM_ForwardDesk)->Arg(1)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_ForwardDefault(benchmark::State& state) { forward_preset(state, "default", 462, 3200); }
BENCHMARK(BM_ForwardDefault)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
