#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "amnet/ops.hpp"
#include "amnet/parallel.hpp"
#include "test_util.hpp"

using namespace amnet;
using amnet::testing::bitwise_equal;
using amnet::testing::max_abs_diff;
using amnet::testing::random_tensor;
using amnet::testing::random_tensor_off_kinks;

TEST_CASE("conv1d identity kernel") {
    const Tensor x = Tensor::from({1, 1, 3}, {1, 2, 3});
    const Tensor w = Tensor::from({1, 1, 1}, {1});
    const Tensor y = conv1d(x, w, nullptr, 1, 0, 1);
    CHECK(y.shape() == std::vector<std::int64_t>{1, 1, 3});
    CHECK(y.data()[0] == 1.0);
    CHECK(y.data()[1] == 2.0);
    CHECK(y.data()[2] == 3.0);
}

TEST_CASE("conv1d hand cross-correlation") {
    const Tensor x = Tensor::from({1, 1, 3}, {1, 2, 3});
    const Tensor w = Tensor::from({1, 1, 2}, {1, 1});
    const Tensor y = conv1d(x, w, nullptr, 1, 0, 1);
    CHECK(y.shape() == std::vector<std::int64_t>{1, 1, 2});
    CHECK(y.data()[0] == 3.0);
    CHECK(y.data()[1] == 5.0);
}

TEST_CASE("conv1d stride 2") {
    const Tensor x = Tensor::from({1, 1, 4}, {1, 2, 3, 4});
    const Tensor w = Tensor::from({1, 1, 2}, {1, 1});
    const Tensor y = conv1d(x, w, nullptr, 2, 0, 1);
    CHECK(y.shape() == std::vector<std::int64_t>{1, 1, 2});
    CHECK(y.data()[0] == 3.0);
    CHECK(y.data()[1] == 7.0);
}

TEST_CASE("conv1d bias and padding") {
    const Tensor x = Tensor::from({1, 1, 3}, {1, 2, 3});
    const Tensor w = Tensor::from({1, 1, 3}, {0, 1, 0});
    const Tensor b = Tensor::from({1}, {10});
    const Tensor y = conv1d(x, w, &b, 1, 1, 1);
    CHECK(y.shape() == std::vector<std::int64_t>{1, 1, 3});
    CHECK(y.data()[0] == 11.0);
    CHECK(y.data()[1] == 12.0);
    CHECK(y.data()[2] == 13.0);
}

TEST_CASE("conv1d shape errors name the axis") {
    const Tensor x = Tensor::from({1, 3, 4}, std::vector<double>(12, 0.0));
    const Tensor w = Tensor::from({2, 3, 2}, std::vector<double>(12, 0.0));
    CHECK_THROWS_WITH_AS(conv1d(x, w, nullptr, 1, 0, 2),
                         doctest::Contains("input channel axis"), ValueError);

    const Tensor w_bad = Tensor::from({2, 2, 2}, std::vector<double>(8, 0.0));
    CHECK_THROWS_WITH_AS(conv1d(x, w_bad, nullptr, 1, 0, 1),
                         doctest::Contains("weight channel axis"), ValueError);

    const Tensor w_long = Tensor::from({1, 3, 6}, std::vector<double>(18, 0.0));
    CHECK_THROWS_WITH_AS(conv1d(x, w_long, nullptr, 1, 0, 1),
                         doctest::Contains("window longer than padded input"), ValueError);
}

TEST_CASE("conv1d depthwise identity: groups=Cin, K=1, unit weights") {
    const Tensor x = random_tensor({2, 5, 9}, 1234);
    const Tensor w = Tensor::full({5, 1, 1}, 1.0);
    const Tensor y = conv1d(x, w, nullptr, 1, 0, 5);
    CHECK(bitwise_equal(x, y));
}

// Grouped convolution equals independent per-group convolutions on channel
// slices, concatenated.
TEST_CASE("conv1d grouping oracle") {
    std::uint64_t seed = 7;
    for (int cin = 1; cin <= 8; ++cin) {
        for (int cout = 1; cout <= 8; ++cout) {
            for (int groups = 1; groups <= 8; ++groups) {
                if (cin % groups != 0 || cout % groups != 0) continue;
                for (int stride : {1, 2}) {
                    for (int pad : {0, 1}) {
                        const int k = 3, len = 17;
                        const Tensor x = random_tensor({2, cin, len}, seed++);
                        const Tensor w = random_tensor({cout, cin / groups, k}, seed++);
                        const Tensor y = conv1d(x, w, nullptr, stride, pad, groups);

                        const int cpg = cin / groups, copg = cout / groups;
                        const std::int64_t lout = y.dim(2);
                        for (int g = 0; g < groups; ++g) {
                            Tensor xs({2, cpg, len});
                            for (int b = 0; b < 2; ++b)
                                for (int c = 0; c < cpg; ++c)
                                    for (int l = 0; l < len; ++l)
                                        xs.data()[(b * cpg + c) * len + l] =
                                            x.data()[(b * cin + g * cpg + c) * len + l];
                            Tensor wsub({copg, cpg, k});
                            for (int c = 0; c < copg; ++c)
                                for (int q = 0; q < cpg * k; ++q)
                                    wsub.data()[c * cpg * k + q] =
                                        w.data()[(g * copg + c) * cpg * k + q];
                            const Tensor ys = conv1d(xs, wsub, nullptr, stride, pad, 1);
                            for (int b = 0; b < 2; ++b)
                                for (int c = 0; c < copg; ++c)
                                    for (std::int64_t l = 0; l < lout; ++l)
                                        CHECK(ys.data()[(b * copg + c) * lout + l] ==
                                              y.data()[(b * cout + g * copg + c) * lout + l]);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("relu6 clamps") {
    const Tensor x = Tensor::from({3}, {-1, 3, 7});
    const Tensor y = relu6(x);
    CHECK(y.data()[0] == 0.0);
    CHECK(y.data()[1] == 3.0);
    CHECK(y.data()[2] == 6.0);
}

TEST_CASE("batchnorm1d hand statistics") {
    const Tensor x = Tensor::from({1, 1, 3}, {1, 2, 3});
    const Tensor gamma = Tensor::full({1}, 1.0);
    const Tensor beta = Tensor::zeros({1});
    Tensor rm = Tensor::zeros({1});
    Tensor rv = Tensor::full({1}, 1.0);
    const Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-12);
    CHECK(y.data()[0] == doctest::Approx(-1.224745).epsilon(1e-5));
    CHECK(y.data()[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(y.data()[2] == doctest::Approx(1.224745).epsilon(1e-5));

    // Running statistics: mean 2, population var 2/3 -> unbiased var 1.
    CHECK(rm.data()[0] == doctest::Approx(0.1 * 2.0));
    CHECK(rv.data()[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 1.0));
}

TEST_CASE("batchnorm1d constant channel maps to beta") {
    const Tensor x = Tensor::from({1, 1, 3}, {5, 5, 5});
    const Tensor gamma = Tensor::full({1}, 1.0);
    const Tensor beta = Tensor::full({1}, 2.0);
    Tensor rm = Tensor::zeros({1});
    Tensor rv = Tensor::full({1}, 1.0);
    const Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-5);
    for (int i = 0; i < 3; ++i) CHECK(y.data()[static_cast<std::size_t>(i)] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("batchnorm1d eval with identity statistics") {
    const Tensor x = random_tensor({2, 3, 5}, 42);
    const Tensor gamma = Tensor::full({3}, 1.0);
    const Tensor beta = Tensor::zeros({3});
    Tensor rm = Tensor::zeros({3});
    Tensor rv = Tensor::full({3}, 1.0);
    const Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::eval, 0.1, 1e-5);
    CHECK(max_abs_diff(x, y) < 1e-4);
}

TEST_CASE("batchnorm1d train output is normalized per channel") {
    const Tensor x = random_tensor({4, 3, 16}, 1234, -2.0, 5.0);
    const Tensor gamma = Tensor::full({3}, 1.0);
    const Tensor beta = Tensor::zeros({3});
    Tensor rm = Tensor::zeros({3});
    Tensor rv = Tensor::full({3}, 1.0);
    const Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-12);
    const std::int64_t n = 4 * 16;
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (int b = 0; b < 4; ++b)
            for (int l = 0; l < 16; ++l) mean += y.data()[(b * 3 + c) * 16 + l];
        mean /= static_cast<double>(n);
        for (int b = 0; b < 4; ++b)
            for (int l = 0; l < 16; ++l) {
                const double d = y.data()[(b * 3 + c) * 16 + l] - mean;
                var += d * d;
            }
        var /= static_cast<double>(n);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("batchnorm1d parameter errors") {
    const Tensor x = Tensor::from({1, 1, 1}, {1});
    const Tensor gamma = Tensor::full({1}, 1.0);
    const Tensor beta = Tensor::zeros({1});
    Tensor rm = Tensor::zeros({1});
    Tensor rv = Tensor::full({1}, 1.0);
    CHECK_THROWS_WITH_AS(batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 0.0),
                         doctest::Contains("eps must be positive"), ValueError);
    CHECK_THROWS_WITH_AS(batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-5),
                         doctest::Contains("insufficient elements for batch statistics"), ValueError);
}

TEST_CASE("global_avg_pool1d means") {
    const Tensor a = Tensor::from({1, 1, 3}, {1, 2, 3});
    CHECK(global_avg_pool1d(a).data()[0] == 2.0);
    const Tensor b = Tensor::from({1, 1, 1}, {4});
    CHECK(global_avg_pool1d(b).data()[0] == 4.0);
    const Tensor c = Tensor::from({1, 2, 2}, {1, 1, 2, 4});
    const Tensor y = global_avg_pool1d(c);
    CHECK(y.data()[0] == 1.0);
    CHECK(y.data()[1] == 3.0);
}

TEST_CASE("linear examples") {
    const Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    const Tensor x = Tensor::from({1, 2}, {1, 0});
    CHECK(bitwise_equal(linear(x, eye, nullptr), x));

    const Tensor w = Tensor::from({1, 2}, {3, 4});
    const Tensor b = Tensor::from({1}, {1});
    const Tensor x2 = Tensor::from({1, 2}, {1, 2});
    CHECK(linear(x2, w, &b).data()[0] == 12.0);

    const Tensor zero = Tensor::zeros({1, 2});
    const Tensor b7 = Tensor::from({1}, {7});
    CHECK(linear(zero, w, &b7).data()[0] == 7.0);

    const Tensor w_bad = Tensor::from({1, 3}, {1, 2, 3});
    CHECK_THROWS_WITH_AS(linear(x2, w_bad, nullptr), doctest::Contains("weight inner axis"), ValueError);
}

TEST_CASE("backward: linear functional") {
    Tensor x = Tensor::from({3}, {5, -1, 2}, true);
    Tape tape;
    const Tensor loss = sum(x, &tape);
    tape.backward(loss);
    for (int i = 0; i < 3; ++i) CHECK(x.grad()[static_cast<std::size_t>(i)] == 1.0);
}

TEST_CASE("backward: quadratic") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tape tape;
    const Tensor loss = sum(mul(x, x, &tape), &tape);
    tape.backward(loss);
    CHECK(x.grad()[0] == 2.0);
    CHECK(x.grad()[1] == 4.0);
}

TEST_CASE("backward: fan-out sums contributions") {
    Tensor x = Tensor::from({3}, {1, 2, 3}, true);
    Tape tape;
    const Tensor loss = add(sum(x, &tape), sum(x, &tape), &tape);
    tape.backward(loss);
    for (int i = 0; i < 3; ++i) CHECK(x.grad()[static_cast<std::size_t>(i)] == 2.0);
}

TEST_CASE("backward rejects non-scalar loss") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tape tape;
    const Tensor y = mul(x, x, &tape);
    CHECK_THROWS_WITH_AS(tape.backward(y), doctest::Contains("scalar"), ValueError);
}

TEST_CASE("grad_check: exact for linear functional") {
    const Tensor x = random_tensor({5}, 11);
    const double err = grad_check([](const Tensor& t, Tape& tape) { return sum(t, &tape); }, x, 1e-5);
    CHECK(err < 1e-9);
}

TEST_CASE("grad_check: conv1d -> relu6 -> sum matches finite differences") {
    const Tensor x = random_tensor_off_kinks({2, 3, 12}, 1234);
    const Tensor w = random_tensor({4, 3, 3}, 99);
    const double err = grad_check(
        [&w](const Tensor& t, Tape& tape) {
            const Tensor y = conv1d(t, w, nullptr, 1, 1, 1, &tape);
            return sum(relu6(y, &tape), &tape);
        },
        x, 1e-5);
    CHECK(err <= 1e-4);
}

TEST_CASE("grad_check: conv1d weight gradient") {
    const Tensor x = random_tensor({2, 2, 10}, 5);
    const Tensor w0 = random_tensor({4, 1, 3}, 6);
    const double err = grad_check(
        [&x](const Tensor& w, Tape& tape) {
            const Tensor y = conv1d(x, w, nullptr, 2, 1, 2, &tape);
            return sum(mul(y, y, &tape), &tape);
        },
        w0, 1e-5);
    CHECK(err <= 1e-4);
}

// The probe loss is a weighted sum: sum(y^2) after batch norm is constant in
// x (the normalized activations always satisfy sum x_hat = 0, sum x_hat^2 =
// N), which would leave nothing but cancellation noise to compare.
TEST_CASE("grad_check: batchnorm1d train mode") {
    const Tensor x0 = random_tensor({3, 2, 7}, 1234, -2.0, 2.0);
    const Tensor gamma = Tensor::from({2}, {1.3, 0.7});
    const Tensor beta = Tensor::from({2}, {0.1, -0.2});
    const Tensor probe = random_tensor({3, 2, 7}, 555);
    const double err = grad_check(
        [&](const Tensor& x, Tape& tape) {
            Tensor rm = Tensor::zeros({2});
            Tensor rv = Tensor::full({2}, 1.0);
            const Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-5, &tape);
            return sum(mul(y, probe, &tape), &tape);
        },
        x0, 1e-5);
    CHECK(err <= 1e-4);
}

TEST_CASE("grad_check: batchnorm1d affine parameters") {
    const Tensor x = random_tensor({2, 2, 6}, 77, -2.0, 2.0);
    const Tensor g0 = Tensor::from({2}, {1.1, 0.9});
    const Tensor probe = random_tensor({2, 2, 6}, 556);
    const double err = grad_check(
        [&](const Tensor& gamma, Tape& tape) {
            Tensor beta = Tensor::from({2}, {0.4, -0.3}, true);
            Tensor rm = Tensor::zeros({2});
            Tensor rv = Tensor::full({2}, 1.0);
            const Tensor y = batchnorm1d(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-5, &tape);
            return sum(mul(y, probe, &tape), &tape);
        },
        g0, 1e-5);
    CHECK(err <= 1e-4);
}

TEST_CASE("grad_check: linear and pooling") {
    const Tensor x0 = random_tensor({3, 4}, 8);
    const Tensor w = random_tensor({2, 4}, 9);
    const Tensor b = random_tensor({2}, 10);
    const double err_x = grad_check(
        [&](const Tensor& x, Tape& tape) {
            const Tensor y = linear(x, w, &b, &tape);
            return sum(mul(y, y, &tape), &tape);
        },
        x0, 1e-5);
    CHECK(err_x <= 1e-4);

    const Tensor p0 = random_tensor({2, 3, 5}, 12);
    const double err_p = grad_check(
        [](const Tensor& x, Tape& tape) {
            const Tensor y = global_avg_pool1d(x, &tape);
            return sum(mul(y, y, &tape), &tape);
        },
        p0, 1e-5);
    CHECK(err_p <= 1e-4);
}

TEST_CASE("fused batchnorm+relu6 matches the composed ops") {
    const Tensor x = random_tensor({3, 4, 11}, 1234, -3.0, 3.0);
    const Tensor gamma = random_tensor({4}, 1, 0.5, 1.5);
    const Tensor beta = random_tensor({4}, 2, -0.5, 0.5);

    for (Mode mode : {Mode::train, Mode::eval}) {
        Tensor rm1 = Tensor::zeros({4}), rv1 = Tensor::full({4}, 1.0);
        Tensor rm2 = Tensor::zeros({4}), rv2 = Tensor::full({4}, 1.0);
        const Tensor composed = relu6(batchnorm1d(x, gamma, beta, rm1, rv1, mode, 0.1, 1e-5));
        const Tensor fused = batchnorm1d_relu6(x, gamma, beta, rm2, rv2, mode, 0.1, 1e-5);
        CHECK(bitwise_equal(composed, fused));
        CHECK(bitwise_equal(rm1, rm2));
        CHECK(bitwise_equal(rv1, rv2));
    }

    // Gradients agree to rounding (reduction orders differ slightly).
    auto grads = [&](bool fuse) {
        Tensor xi = Tensor::from(x.shape(), {x.data().begin(), x.data().end()}, true);
        Tensor g = Tensor::from(gamma.shape(), {gamma.data().begin(), gamma.data().end()}, true);
        Tensor b = Tensor::from(beta.shape(), {beta.data().begin(), beta.data().end()}, true);
        Tensor rm = Tensor::zeros({4}), rv = Tensor::full({4}, 1.0);
        Tape tape;
        Tensor y = fuse ? batchnorm1d_relu6(xi, g, b, rm, rv, Mode::train, 0.1, 1e-5, &tape)
                        : relu6(batchnorm1d(xi, g, b, rm, rv, Mode::train, 0.1, 1e-5, &tape), &tape);
        const Tensor probe = random_tensor(x.shape(), 99);
        tape.backward(sum(mul(y, probe, &tape), &tape));
        std::vector<double> out(xi.grad().begin(), xi.grad().end());
        out.insert(out.end(), g.grad().begin(), g.grad().end());
        out.insert(out.end(), b.grad().begin(), b.grad().end());
        return out;
    };
    const auto composed_grads = grads(false);
    const auto fused_grads = grads(true);
    REQUIRE(composed_grads.size() == fused_grads.size());
    for (std::size_t i = 0; i < fused_grads.size(); ++i) {
        CHECK(std::abs(composed_grads[i] - fused_grads[i]) < 1e-12);
    }
}

TEST_CASE("grad_check: fused batchnorm+relu6") {
    const Tensor x0 = random_tensor_off_kinks({2, 3, 9}, 1234);
    const Tensor gamma = random_tensor({3}, 5, 0.5, 1.5);
    const Tensor beta = random_tensor({3}, 6, -0.3, 0.3);
    const Tensor probe = random_tensor({2, 3, 9}, 7);
    const double err = grad_check(
        [&](const Tensor& x, Tape& tape) {
            Tensor rm = Tensor::zeros({3});
            Tensor rv = Tensor::full({3}, 1.0);
            const Tensor y = batchnorm1d_relu6(x, gamma, beta, rm, rv, Mode::train, 0.1, 1e-5, &tape);
            return sum(mul(y, probe, &tape), &tape);
        },
        x0, 1e-5);
    CHECK(err <= 1e-4);
}

TEST_CASE("parallel kernels match the single-threaded reference bitwise") {
    const Tensor x = random_tensor({4, 6, 33}, 2025);
    const Tensor w = random_tensor({8, 3, 3}, 2026);

    set_num_threads(1);
    const Tensor serial = conv1d(x, w, nullptr, 2, 1, 2);
    set_num_threads(4);
    const Tensor parallel = conv1d(x, w, nullptr, 2, 1, 2);
    set_num_threads(1);
    CHECK(bitwise_equal(serial, parallel));
}
