#include "synrl/datasets.hpp"
#include "synrl/errors.hpp"
#include "synrl/mlp.hpp"
#include "synrl/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace synrl;

namespace {

Dataset random_dataset(std::size_t n, std::size_t d, std::size_t c, std::uint64_t seed, bool one_hot) {
    Rng rng(seed);
    Dataset ds{Matrix(n, d), Matrix::Zero(n, c)};
    for (Eigen::Index i = 0; i < ds.X.size(); ++i) ds.X.data()[i] = rng.uniform(-2, 2);
    for (std::size_t i = 0; i < n; ++i) {
        if (one_hot)
            ds.Y(i, rng.below(c)) = 1.0;
        else
            ds.Y(i, 0) = rng.below(2) ? 1.0 : -1.0;
    }
    return ds;
}

}  // namespace

TEST_CASE("synapse count and weight shapes") {
    const Mlp net(chain_layers({3, 4, 2}, ActivationKind::Tanh, ActivationKind::Identity), LossKind::MeanSquaredEuclidean);
    CHECK(net.synapse_count() == 4 * 4 + 2 * 5);
    CHECK(net.weights(0).rows() == 4);
    CHECK(net.weights(0).cols() == 4);
    CHECK(net.weights(1).rows() == 2);
    CHECK(net.weights(1).cols() == 5);
    CHECK_THROWS_AS(Mlp({{3, 4, ActivationKind::Tanh}, {5, 2, ActivationKind::Identity}}, LossKind::MeanSquaredEuclidean),
                    ValidationError);
}

TEST_CASE("canonical synapse order is layer, row, column") {
    Mlp net(chain_layers({2, 2, 1}, ActivationKind::Tanh, ActivationKind::Identity), LossKind::MeanSquaredEuclidean);
    for (std::size_t i = 0; i < net.synapse_count(); ++i) net.synapse(i) = static_cast<double>(i);
    CHECK(net.weights(0)(0, 0) == 0.0);
    CHECK(net.weights(0)(0, 2) == 2.0);
    CHECK(net.weights(0)(1, 0) == 3.0);
    CHECK(net.weights(1)(0, 0) == 6.0);
    CHECK(net.weights(1)(0, 2) == 8.0);
}

TEST_CASE("forward of a zero network is zero") {
    const Mlp net(chain_layers({2, 5, 1}, ActivationKind::Tanh, ActivationKind::Identity), LossKind::MeanSquaredEuclidean);
    Matrix X(3, 2);
    X << 1, 2, -7, 3, 10, -10;
    const Matrix out = forward(net, X);
    CHECK(out.rows() == 3);
    CHECK(out.cols() == 1);
    CHECK(out.isZero(0.0));
}

TEST_CASE("single neuron forward") {
    Mlp net({{1, 1, ActivationKind::Identity}}, LossKind::MeanSquaredEuclidean);
    net.weights(0) << 0.5, 2.0;
    Matrix X(1, 1);
    X << 1.0;
    CHECK(forward(net, X)(0, 0) == 2.5);
}

TEST_CASE("forward rejects bad inputs") {
    const Mlp net(chain_layers({2, 1}, ActivationKind::Tanh, ActivationKind::Identity), LossKind::MeanSquaredEuclidean);
    CHECK_THROWS_AS(forward(net, Matrix::Zero(2, 3)), ValidationError);
    Matrix X = Matrix::Zero(2, 2);
    X(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(forward(net, X), ValidationError);
}

TEST_CASE("target network reproduces its own labels") {
    BoundaryTaskSpec spec;
    spec.hidden_units = 12;
    spec.n_points = 200;
    spec.seed = 42;
    const auto task = generate_boundary_task(spec);
    const auto again = generate_boundary_task(spec);
    const Matrix a = forward(task.target, task.data.X);
    const Matrix b = forward(again.target, again.data.X);
    CHECK(a == b);
    for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(task.data.Y(i, 0) == (a(i, 0) > 0 ? 1.0 : -1.0));
}

TEST_CASE("cross-entropy of a zero network is ln 10") {
    const Mlp net(chain_layers({6, 10}, ActivationKind::Relu, ActivationKind::Identity), LossKind::SoftmaxCrossEntropy);
    const auto data = random_dataset(7, 6, 10, 3, true);
    CHECK(loss(net, data) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("mse is zero when outputs equal labels") {
    Mlp net({{1, 1, ActivationKind::Identity}}, LossKind::MeanSquaredEuclidean);
    net.weights(0) << 0.0, 1.0;
    Dataset d{Matrix(3, 1), Matrix(3, 1)};
    d.X << -1, 1, 0.25;
    d.Y = d.X;
    CHECK(loss(net, d) == 0.0);
    CHECK(accuracy(net, Dataset{d.X.topRows(2), d.Y.topRows(2)}) == 1.0);
}

TEST_CASE("loss matches a per-sample hand sum") {
    for (auto kind : {LossKind::MeanSquaredEuclidean, LossKind::SoftmaxCrossEntropy}) {
        const Mlp net = init_weights(chain_layers({3, 4, 2}, ActivationKind::Tanh, ActivationKind::Identity), kind,
                                     InitScheme::uniform(-1, 1), 17);
        const auto data = random_dataset(3, 3, 2, 19, true);
        double total = 0.0;
        for (Eigen::Index i = 0; i < 3; ++i) {
            // hand forward, one sample at a time
            double h[4];
            for (int j = 0; j < 4; ++j) {
                double z = net.weights(0)(j, 0);
                for (int k = 0; k < 3; ++k) z += net.weights(0)(j, k + 1) * data.X(i, k);
                h[j] = std::tanh(z);
            }
            double o[2];
            for (int j = 0; j < 2; ++j) {
                o[j] = net.weights(1)(j, 0);
                for (int k = 0; k < 4; ++k) o[j] += net.weights(1)(j, k + 1) * h[k];
            }
            if (kind == LossKind::MeanSquaredEuclidean) {
                total += (o[0] - data.Y(i, 0)) * (o[0] - data.Y(i, 0)) + (o[1] - data.Y(i, 1)) * (o[1] - data.Y(i, 1));
            } else {
                const int cls = data.Y(i, 0) == 1.0 ? 0 : 1;
                total += -(o[cls] - std::log(std::exp(o[0]) + std::exp(o[1])));
            }
        }
        CHECK(loss(net, data) == doctest::Approx(total / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("softmax stays finite for large logits") {
    Mlp net({{1, 3, ActivationKind::Identity}}, LossKind::SoftmaxCrossEntropy);
    net.weights(0) << 0, 900, 0, -900, 0, 0;
    Dataset d{Matrix::Constant(2, 1, 1.0), Matrix::Zero(2, 3)};
    d.Y(0, 0) = 1;
    d.Y(1, 2) = 1;
    const double l = loss(net, d);
    CHECK(std::isfinite(l));
    CHECK(l == doctest::Approx(900.0 / 2.0).epsilon(1e-9));
}

TEST_CASE("accuracy uses a strict positive threshold") {
    const Mlp net(chain_layers({2, 3, 1}, ActivationKind::Tanh, ActivationKind::Identity), LossKind::MeanSquaredEuclidean);
    Dataset d{Matrix::Ones(5, 2), Matrix::Ones(5, 1)};
    CHECK(accuracy(net, d) == 0.0);
}

TEST_CASE("accuracy matches a brute-force loop") {
    for (std::size_t c : {std::size_t{1}, std::size_t{4}}) {
        const Mlp net = init_weights(chain_layers({3, 5, c}, ActivationKind::Relu, ActivationKind::Identity),
                                     c == 1 ? LossKind::MeanSquaredEuclidean : LossKind::SoftmaxCrossEntropy,
                                     InitScheme::uniform(-1, 1), 5);
        const auto data = random_dataset(100, 3, c, 6, c > 1);
        const Matrix out = forward(net, data.X);
        int hits = 0;
        for (Eigen::Index i = 0; i < 100; ++i) {
            if (c == 1) {
                hits += (out(i, 0) > 0) == (data.Y(i, 0) > 0);
            } else {
                Eigen::Index p = 0, t = 0;
                out.row(i).maxCoeff(&p);
                data.Y.row(i).maxCoeff(&t);
                hits += p == t;
            }
        }
        CHECK(accuracy(net, data) == hits / 100.0);
    }
}

TEST_CASE("pure evaluation is repeatable") {
    const Mlp net = init_weights(chain_layers({3, 4, 2}, ActivationKind::Tanh, ActivationKind::Identity),
                                 LossKind::SoftmaxCrossEntropy, InitScheme::uniform(-1, 1), 2);
    const auto data = random_dataset(20, 3, 2, 4, true);
    CHECK(forward(net, data.X) == forward(net, data.X));
    CHECK(loss(net, data) == loss(net, data));
}

TEST_CASE("weight initialization") {
    const auto layers = chain_layers({99, 100}, ActivationKind::Tanh, ActivationKind::Identity);
    const Mlp zero = init_weights(layers, LossKind::MeanSquaredEuclidean, InitScheme::zero(), 1);
    for (std::size_t i = 0; i < zero.synapse_count(); ++i) CHECK(zero.synapse(i) == 0.0);

    const Mlp a = init_weights(layers, LossKind::MeanSquaredEuclidean, InitScheme::uniform(-1, 1), 123);
    const Mlp b = init_weights(layers, LossKind::MeanSquaredEuclidean, InitScheme::uniform(-1, 1), 123);
    CHECK(a == b);
    REQUIRE(a.synapse_count() == 10000);
    double sum = 0, lo = 1, hi = -1;
    for (std::size_t i = 0; i < a.synapse_count(); ++i) {
        sum += a.synapse(i);
        lo = std::min(lo, a.synapse(i));
        hi = std::max(hi, a.synapse(i));
    }
    CHECK(std::abs(sum / 10000.0) <= 0.05);
    CHECK(lo >= -1.0);
    CHECK(hi <= 1.0);
    CHECK_THROWS_AS(init_weights(layers, LossKind::MeanSquaredEuclidean, InitScheme::uniform(1, 1), 0), ValidationError);
}

TEST_CASE("network json round trip is exact") {
    const Mlp net = init_weights(chain_layers({3, 7, 2}, ActivationKind::Relu, ActivationKind::Identity),
                                 LossKind::SoftmaxCrossEntropy, InitScheme::uniform(-1, 1), 9);
    const Mlp back = mlp_from_json(mlp_to_json(net));
    CHECK(back == net);
    CHECK(back.layers() == net.layers());
    CHECK(back.loss_kind() == net.loss_kind());
    CHECK_THROWS_AS(mlp_from_json("[]"), ValidationError);
}

TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(validate_dataset(Dataset{Matrix(0, 2), Matrix(0, 1)}), ValidationError);
    CHECK_THROWS_AS(validate_dataset(Dataset{Matrix::Zero(3, 2), Matrix::Zero(2, 1)}), ValidationError);
}
