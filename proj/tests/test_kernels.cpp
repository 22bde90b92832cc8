#include "adaptopt/kernels.hpp"
#include "adaptopt/param_store.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace adaptopt;

namespace {

// Large enough to take the OpenMP path and span many reduction blocks.
constexpr std::size_t big = kernels::parallel_threshold * 3 + 17;

std::vector<double> random_vector(std::uint64_t seed, std::size_t n, double lo, double hi) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double &x : out) x = rng.uniform(lo, hi);
    return out;
}

struct ThreadGuard {
    explicit ThreadGuard(int n) { kernels::set_thread_count(n); }
    ~ThreadGuard() { kernels::set_thread_count(0); }
};

}    // namespace

TEST_CASE("elementwise kernels match the serial reference bitwise") {
    ThreadGuard threads(4);
    const auto g = random_vector(1, big, -3.0, 3.0);
    const auto theta0 = random_vector(2, big, -1.0, 1.0);
    const auto state0 = random_vector(3, big, 0.0, 2.0);

    SUBCASE("sgd") {
        auto a = theta0, b = theta0;
        kernels::sgd_update(a, g, 0.01);
        kernels::serial::sgd_update(b, g, 0.01);
        CHECK(a == b);
    }
    SUBCASE("momentum") {
        auto a = theta0, b = theta0, va = state0, vb = state0;
        for (int step = 0; step < 3; ++step) {
            kernels::momentum_update(a, va, g, 0.9, 0.01);
            kernels::serial::momentum_update(b, vb, g, 0.9, 0.01);
        }
        CHECK(a == b);
        CHECK(va == vb);
    }
    SUBCASE("adagrad") {
        auto a = theta0, b = theta0, va = state0, vb = state0;
        kernels::adagrad_update(a, va, g, 0.1, 1e-8);
        kernels::serial::adagrad_update(b, vb, g, 0.1, 1e-8);
        CHECK(a == b);
        CHECK(va == vb);
    }
    SUBCASE("rmsprop") {
        auto a = theta0, b = theta0, va = state0, vb = state0;
        kernels::rmsprop_update(a, va, g, 0.9, 0.01, 1e-8);
        kernels::serial::rmsprop_update(b, vb, g, 0.9, 0.01, 1e-8);
        CHECK(a == b);
        CHECK(va == vb);
    }
    SUBCASE("adam") {
        const kernels::AdamCoefficients c{0.9, 0.999, 1e-3, 1e-8, 0.1, 0.001};
        auto a = theta0, b = theta0, ma = state0, mb = state0, va = state0, vb = state0;
        kernels::adam_update(a, ma, va, g, c);
        kernels::serial::adam_update(b, mb, vb, g, c);
        CHECK(a == b);
        CHECK(ma == mb);
        CHECK(va == vb);
    }
    SUBCASE("scale_add and scale") {
        std::vector<double> a(big), b(big);
        kernels::scale_add(-2.5, g, theta0, a);
        kernels::serial::scale_add(-2.5, g, theta0, b);
        CHECK(a == b);
        kernels::scale(a, 0.3);
        kernels::serial::scale(b, 0.3);
        CHECK(a == b);
    }
}

TEST_CASE("blocked reductions agree with the serial sum and ignore thread count") {
    const auto x = random_vector(9, big, -2.0, 2.0);
    const auto y = random_vector(10, big, -2.0, 2.0);

    const double serial = kernels::serial::sum_squares(x);
    double one_thread = 0.0;
    double four_threads = 0.0;
    {
        ThreadGuard t(1);
        one_thread = kernels::sum_squares(x);
    }
    {
        ThreadGuard t(4);
        four_threads = kernels::sum_squares(x);
    }
    CHECK(one_thread == four_threads);
    CHECK(std::abs(one_thread - serial) <= 1e-12 * serial);

    const double d_serial = kernels::serial::diff_sum_squares(x, y);
    const double d_parallel = kernels::diff_sum_squares(x, y);
    CHECK(std::abs(d_parallel - d_serial) <= 1e-12 * d_serial);
}

TEST_CASE("reductions below one block equal the serial loop exactly") {
    const auto x = random_vector(11, kernels::reduction_block, -1.0, 1.0);
    CHECK(kernels::sum_squares(x) == kernels::serial::sum_squares(x));
}
