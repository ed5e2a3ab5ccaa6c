#include <doctest.h>

#include <cmath>
#include <vector>

#include "deligan/autodiff.hpp"
#include "deligan/error.hpp"
#include "deligan/rng.hpp"

using namespace deligan;
using ad::Tensor;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, rng::Stream& rng, double lo = -2.0,
                     double hi = 2.0) {
    std::vector<double> v(r * c);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::from_values(r, c, std::move(v));
}

// Keeps entries away from the relu/leaky_relu kink so central differences
// with eps=1e-5 stay on one side of it.
Tensor random_tensor_off_kink(std::size_t r, std::size_t c, rng::Stream& rng) {
    std::vector<double> v(r * c);
    for (auto& x : v) {
        double u = rng.uniform(-2.0, 2.0);
        if (std::abs(u) < 0.05) u = u < 0 ? u - 0.05 : u + 0.05;
        x = u;
    }
    return Tensor::from_values(r, c, std::move(v));
}

} // namespace

TEST_SUITE_BEGIN("autodiff");

TEST_CASE("matmul identity and hand examples") {
    auto eye = Tensor::from_values(2, 2, {1, 0, 0, 1});
    auto v = Tensor::from_values(2, 1, {3, 4});
    auto out = ad::matmul(eye, v);
    CHECK(out.values() == std::vector<double>{3, 4});

    auto a = Tensor::from_values(1, 2, {1, 2});
    auto b = Tensor::from_values(2, 1, {3, 4});
    CHECK(ad::matmul(a, b).item() == doctest::Approx(11.0));
}

TEST_CASE("matmul shape mismatch names both shapes") {
    auto a = Tensor::zeros(2, 3);
    auto b = Tensor::zeros(2, 3);
    CHECK_THROWS_WITH_AS(ad::matmul(a, b), doctest::Contains("2x3"), ShapeError);
}

TEST_CASE("matmul gradient of sum(out) wrt a is row-broadcast of column sums of b") {
    rng::Stream rng(11);
    auto a = random_tensor(4, 3, rng);
    auto b = random_tensor(3, 2, rng);
    a.set_requires_grad(true);
    {
        ad::GradientTape tape;
        auto loss = ad::sum(ad::matmul(a, b));
        tape.backward(loss);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t p = 0; p < 3; ++p) {
            double colsum = b.at(p, 0) + b.at(p, 1);
            CHECK(a.grad()[i * 3 + p] == doctest::Approx(colsum).epsilon(1e-12));
        }
    }
    // independent route: central finite differences
    a.set_requires_grad(false);
    double err = ad::grad_check([&](const Tensor& x) { return ad::sum(ad::matmul(x, b)); }, a, 1e-5);
    CHECK(err < 1e-6);
}

TEST_CASE("elementwise trivial values") {
    CHECK(ad::sigmoid(Tensor::scalar(0.0)).item() == doctest::Approx(0.5));
    CHECK(ad::log(Tensor::scalar(1.0)).item() == doctest::Approx(0.0));
    CHECK(ad::tanh(Tensor::scalar(0.0)).item() == doctest::Approx(0.0));
    CHECK(ad::relu(Tensor::scalar(-3.0)).item() == 0.0);
    CHECK(ad::leaky_relu(Tensor::scalar(-2.0), 0.2).item() == doctest::Approx(-0.4));
    CHECK(ad::square(Tensor::scalar(-3.0)).item() == doctest::Approx(9.0));
}

TEST_CASE("tanh derivative matches finite differences at 0.3") {
    auto x = Tensor::scalar(0.3);
    double err = ad::grad_check([](const Tensor& t) { return ad::sum(ad::tanh(t)); }, x, 1e-5);
    CHECK(err < 1e-6);
    x.set_requires_grad(true);
    x.zero_grad();
    {
        ad::GradientTape tape;
        auto y = ad::sum(ad::tanh(x));
        tape.backward(y);
    }
    double t = std::tanh(0.3);
    CHECK(x.grad()[0] == doctest::Approx(1.0 - t * t).epsilon(1e-12));
}

TEST_CASE("log clamps non-positive input at 1e-12") {
    auto y = ad::log(Tensor::scalar(-5.0));
    CHECK(y.item() == doctest::Approx(std::log(1e-12)));
    auto x = Tensor::scalar(-5.0, true);
    {
        ad::GradientTape tape;
        auto l = ad::sum(ad::log(x));
        tape.backward(l);
    }
    CHECK(x.grad()[0] == 0.0); // constant region of the clamped function
}

TEST_CASE("binary shape mismatch is an error, no silent broadcast") {
    auto a = Tensor::zeros(2, 3);
    auto b = Tensor::zeros(1, 3);
    CHECK_THROWS_AS(ad::add(a, b), ShapeError);
    CHECK_THROWS_AS(ad::mul(a, b), ShapeError);
    CHECK_NOTHROW(ad::add_bias(a, b));
    CHECK_THROWS_AS(ad::add_bias(a, Tensor::zeros(1, 2)), ShapeError);
}

TEST_CASE("NaN output faults with op name") {
    auto inf = Tensor::scalar(std::numeric_limits<double>::infinity());
    CHECK_THROWS_WITH_AS(ad::sub(inf, inf), doctest::Contains("sub"), NumericError);
}

TEST_CASE("reduce ops: values and uniform gradient broadcast") {
    auto x = Tensor::row({1, 2, 3});
    CHECK(ad::sum(x).item() == doctest::Approx(6.0));
    CHECK(ad::mean(Tensor::row({2, 4})).item() == doctest::Approx(3.0));

    auto v = Tensor::row({1, 2, 3, 4, 5});
    v.set_requires_grad(true);
    {
        ad::GradientTape tape;
        auto m = ad::mean(v);
        tape.backward(m);
    }
    for (double g : v.grad()) CHECK(g == doctest::Approx(0.2).epsilon(1e-15));

    auto m2 = Tensor::from_values(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(ad::sum_rows(m2).values() == std::vector<double>{6, 15});
    CHECK(ad::mean_rows(m2).values() == std::vector<double>{2, 5});
}

TEST_CASE("backward: trivial gradients") {
    auto x = Tensor::row({1, 2, 3});
    x.set_requires_grad(true);
    {
        ad::GradientTape tape;
        auto loss = ad::sum(x);
        tape.backward(loss);
    }
    CHECK(x.grad() == std::vector<double>{1, 1, 1});

    auto y = Tensor::row({2, 3});
    y.set_requires_grad(true);
    {
        ad::GradientTape tape;
        auto loss = ad::sum(ad::mul(y, y));
        tape.backward(loss);
    }
    CHECK(y.grad() == std::vector<double>{4, 6});
}

TEST_CASE("backward requires scalar loss") {
    auto x = Tensor::row({1, 2}, true);
    ad::GradientTape tape;
    auto y = ad::mul(x, x);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
}

TEST_CASE("fan-out accumulates both contributions") {
    // z = sum(x*x) + 3*sum(x): dz/dx = 2x + 3
    auto x = Tensor::row({1.5, -2.0}, true);
    {
        ad::GradientTape tape;
        auto loss = ad::add(ad::sum(ad::mul(x, x)), ad::mul_scalar(ad::sum(x), 3.0));
        tape.backward(loss);
    }
    CHECK(x.grad()[0] == doctest::Approx(2 * 1.5 + 3).epsilon(1e-15));
    CHECK(x.grad()[1] == doctest::Approx(2 * -2.0 + 3).epsilon(1e-15));
}

TEST_CASE("unreachable requires_grad tensors hold zero") {
    auto x = Tensor::row({1, 2}, true);
    auto orphan = Tensor::row({5, 6}, true);
    {
        ad::GradientTape tape;
        auto dead_end = ad::mul(orphan, orphan); // recorded but not part of loss
        (void)dead_end;
        auto loss = ad::sum(x);
        tape.backward(loss);
    }
    CHECK(orphan.grad() == std::vector<double>{0, 0});
}

TEST_CASE("two backward calls with zeroed grads are bit-identical") {
    rng::Stream rng(7);
    auto x = random_tensor(3, 4, rng);
    auto w = random_tensor(4, 2, rng);
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    std::vector<double> gx1, gw1;
    {
        ad::GradientTape tape;
        auto loss = ad::mean(ad::tanh(ad::matmul(x, w)));
        tape.backward(loss);
        gx1 = x.grad();
        gw1 = w.grad();
        x.zero_grad();
        w.zero_grad();
        tape.backward(loss);
    }
    CHECK(x.grad() == gx1);
    CHECK(w.grad() == gw1);
}

TEST_CASE("gradient accumulation is additive across backward calls") {
    auto x = Tensor::row({1, 1}, true);
    {
        ad::GradientTape tape;
        auto loss = ad::sum(x);
        tape.backward(loss);
        tape.backward(loss); // no zeroing in between
    }
    CHECK(x.grad() == std::vector<double>{2, 2});
}

TEST_CASE("gather_rows scatter-adds gradients into picked rows only") {
    auto table = Tensor::from_values(3, 2, {1, 2, 3, 4, 5, 6}, true);
    std::vector<int> ids{2, 0, 2};
    {
        ad::GradientTape tape;
        auto picked = ad::gather_rows(table, ids);
        CHECK(picked.values() == std::vector<double>{5, 6, 1, 2, 5, 6});
        auto loss = ad::sum(picked);
        tape.backward(loss);
    }
    CHECK(table.grad() == std::vector<double>{1, 1, 0, 0, 2, 2});
}

TEST_CASE("grad_check: trivial and derived cases") {
    rng::Stream rng(23);
    auto x = random_tensor(2, 3, rng);
    CHECK(ad::grad_check([](const Tensor& t) { return ad::sum(t); }, x, 1e-5) < 1e-10);
    auto y = random_tensor(2, 3, rng);
    CHECK(ad::grad_check([](const Tensor& t) { return ad::sum(ad::square(t)); }, y, 1e-5) < 1e-6);
}

TEST_CASE("grad_check: BCE over sigmoid over affine, random 8x4 input") {
    rng::Stream rng(31);
    auto w = random_tensor(4, 1, rng);
    auto b = random_tensor(1, 1, rng);
    std::vector<double> labels(8);
    for (auto& l : labels) l = rng.uniform() < 0.5 ? 0.0 : 1.0;
    auto y = Tensor::from_values(8, 1, labels);
    auto x0 = random_tensor(8, 4, rng);
    auto bce = [&](const Tensor& x) {
        auto p = ad::sigmoid(ad::add_bias(ad::matmul(x, w), b));
        auto term = ad::add(ad::mul(y, ad::log(p)), ad::mul(ad::sub_from_scalar(1.0, y),
                                                            ad::log(ad::sub_from_scalar(1.0, p))));
        return ad::neg(ad::mean(term));
    };
    CHECK(ad::grad_check(bce, x0, 1e-5) < 1e-4);
}

TEST_CASE("every registered op matches central finite differences on random inputs") {
    rng::Stream rng(101);
    using Fn = std::function<Tensor(const Tensor&)>;
    std::vector<std::pair<const char*, Fn>> cases = {
        {"add", [&](const Tensor& t) { return ad::mean(ad::add(t, t)); }},
        {"sub", [&](const Tensor& t) { return ad::mean(ad::sub(ad::square(t), t)); }},
        {"mul", [&](const Tensor& t) { return ad::mean(ad::mul(t, t)); }},
        {"neg", [&](const Tensor& t) { return ad::sum(ad::neg(t)); }},
        {"exp", [&](const Tensor& t) { return ad::mean(ad::exp(t)); }},
        {"log", [&](const Tensor& t) { return ad::mean(ad::log(ad::add_scalar(ad::square(t), 0.1))); }},
        {"tanh", [&](const Tensor& t) { return ad::mean(ad::tanh(t)); }},
        {"sigmoid", [&](const Tensor& t) { return ad::mean(ad::sigmoid(t)); }},
        {"square", [&](const Tensor& t) { return ad::mean(ad::square(t)); }},
        {"sum_rows", [&](const Tensor& t) { return ad::mean(ad::sum_rows(ad::tanh(t))); }},
        {"mean_rows", [&](const Tensor& t) { return ad::mean(ad::mean_rows(ad::square(t))); }},
        {"softmax", [&](const Tensor& t) { return ad::mean(ad::square(ad::softmax_rows(t))); }},
        {"scalar_ops",
         [&](const Tensor& t) { return ad::mean(ad::sub_from_scalar(2.0, ad::mul_scalar(t, 1.7))); }},
    };
    for (auto& [name, fn] : cases) {
        for (int rep = 0; rep < 4; ++rep) {
            auto x = random_tensor(3, 5, rng);
            double err = ad::grad_check(fn, x, 1e-5);
            INFO(name << " rep " << rep);
            CHECK(err < 1e-6);
        }
    }
    for (int rep = 0; rep < 4; ++rep) {
        auto x = random_tensor_off_kink(3, 5, rng);
        CHECK(ad::grad_check([](const Tensor& t) { return ad::mean(ad::relu(t)); }, x, 1e-5) < 1e-6);
        CHECK(ad::grad_check([](const Tensor& t) { return ad::mean(ad::leaky_relu(t, 0.2)); }, x,
                             1e-5) < 1e-6);
    }
}

TEST_CASE("no active tape: ops produce plain values") {
    auto x = Tensor::row({1, 2}, true);
    auto y = ad::mul(x, x);
    CHECK_FALSE(static_cast<bool>(y.node()));
    CHECK_FALSE(y.requires_grad());
}

TEST_SUITE_END();
