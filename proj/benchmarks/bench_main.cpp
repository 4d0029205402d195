#include "synrl/datasets.hpp"
#include "synrl/gd.hpp"
#include "synrl/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace synrl;

namespace {

BoundaryTask boundary(std::size_t hidden, std::size_t n) {
    BoundaryTaskSpec spec;
    spec.hidden_units = hidden;
    spec.n_points = n;
    spec.seed = 1;
    return generate_boundary_task(spec);
}

Mlp learner(std::size_t hidden) {
    return init_weights(chain_layers({2, hidden, 1}, ActivationKind::Tanh, ActivationKind::Identity),
                        LossKind::MeanSquaredEuclidean, InitScheme::uniform(-0.1, 0.1), 2);
}

// Roughly OCR-shaped: 784 inputs, 10 classes, one batch.
Dataset ocr_like(std::size_t n) {
    Rng rng(3);
    Dataset d{Matrix(n, 784), Matrix::Zero(n, 10)};
    for (Eigen::Index i = 0; i < d.X.size(); ++i) d.X.data()[i] = rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) d.Y(i, rng.below(10)) = 1.0;
    return d;
}

void BM_ForwardBoundary(benchmark::State& state) {
    const auto task = boundary(100, 2000);
    const auto net = learner(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(forward_unchecked(net, task.data.X));
}
BENCHMARK(BM_ForwardBoundary)->Arg(16)->Arg(100);

void BM_ForwardOcr(benchmark::State& state) {
    const auto data = ocr_like(5000);
    const std::vector<std::size_t> widths =
        state.range(0) == 0 ? std::vector<std::size_t>{784, 10} : std::vector<std::size_t>{784, 32, 10};
    const auto net = init_weights(chain_layers(widths, ActivationKind::Relu, ActivationKind::Identity),
                                  LossKind::SoftmaxCrossEntropy, InitScheme::uniform(-0.1, 0.1), 4);
    for (auto _ : state) benchmark::DoNotOptimize(loss_from_outputs(net.loss_kind(), forward_unchecked(net, data.X), data.Y));
}
BENCHMARK(BM_ForwardOcr)->Arg(0)->Arg(32)->Unit(benchmark::kMillisecond);

// Whole synaptic iterations: action selection, loss, reward, TD updates.
void BM_TrainIterations(benchmark::State& state) {
    const auto task = boundary(16, 500);
    const auto net = learner(16);
    TrainerConfig cfg;
    cfg.iterations = 100;
    cfg.metrics_every = 100;
    cfg.train_policy = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(train(net, QTable(), task.data, nullptr, cfg));
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_TrainIterations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Backprop(benchmark::State& state) {
    const auto data = ocr_like(2000);
    const auto net = init_weights(chain_layers({784, 32, 10}, ActivationKind::Relu, ActivationKind::Identity),
                                  LossKind::SoftmaxCrossEntropy, InitScheme::uniform(-0.1, 0.1), 4);
    for (auto _ : state) benchmark::DoNotOptimize(backprop_gradients(net, data));
}
BENCHMARK(BM_Backprop)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
