#include "adaptopt/param_store.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

using namespace adaptopt;

TEST_CASE("ParamVector enforces shape invariants") {
    ParamVector v(Shape{2, 3});
    CHECK(v.size() == 6);
    CHECK(v.shape() == Shape{2, 3});
    CHECK(v.all_finite());

    CHECK_THROWS_AS(ParamVector(Shape{2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(ParamVector({1.0, 2.0, 3.0}, Shape{2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(ParamVector::from({}), std::invalid_argument);

    v[4] = std::nan("");
    CHECK_FALSE(v.all_finite());
}

TEST_CASE("l2_norm examples") {
    CHECK(l2_norm(ParamVector::from({3.0, 4.0})) == 5.0);
    CHECK(l2_norm(ParamVector::from({0.0, 0.0, 0.0})) == 0.0);
    CHECK(l2_norm(ParamVector::from({1.0, 1.0, 1.0, 1.0})) == 2.0);
    CHECK_THROWS_WITH_AS(l2_norm(ParamVector{}), "empty parameter vector", std::invalid_argument);
}

TEST_CASE("axpy examples") {
    CHECK(axpy(0.0, ParamVector::from({5, 5}), ParamVector::from({1, 2})) == ParamVector::from({1, 2}));
    CHECK(axpy(1.0, ParamVector::from({1, 1}), ParamVector::from({0, 0})) == ParamVector::from({1, 1}));
    CHECK(axpy(-2.0, ParamVector::from({1, 3}), ParamVector::from({4, 4})) == ParamVector::from({2, -2}));
}

TEST_CASE("axpy shape mismatch names both shapes") {
    try {
        (void)axpy(1.0, ParamVector(Shape{2}), ParamVector(Shape{3}));
        FAIL("expected shape mismatch");
    } catch (const std::invalid_argument &e) {
        std::string msg = e.what();
        CHECK(msg.find("[2]") != std::string::npos);
        CHECK(msg.find("[3]") != std::string::npos);
    }
    CHECK_THROWS(axpy(1.0, ParamVector(Shape{2, 3}), ParamVector(Shape{3, 2})));
}

TEST_CASE("rng_uniform is deterministic and in range") {
    Rng a(42);
    Rng b(42);
    CHECK(rng_uniform(a, 0.0, 1.0, 3) == rng_uniform(b, 0.0, 1.0, 3));

    Rng r(7);
    ParamVector u = rng_uniform(r, 0.0, 1.0, 10000);
    for (double x : u.values()) {
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }

    Rng s42(42);
    Rng s43(43);
    CHECK(rng_uniform(s42, 0.0, 1.0, 100) != rng_uniform(s43, 0.0, 1.0, 100));

    Rng bad(1);
    CHECK_THROWS_AS(rng_uniform(bad, 1.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(rng_uniform(bad, 2.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(rng_uniform(bad, 0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("Rng stream is pinned") {
    // Frozen first outputs of SplitMix64 at seed 0; any change to the
    // generator breaks cross-run reproducibility of every recorded result.
    Rng r(0);
    CHECK(r.next_u64() == 0xe220a8397b1dcdafULL);
    CHECK(r.next_u64() == 0x6e789e6aa1b965f4ULL);
    CHECK(r.next_u64() == 0x06c45d188009454fULL);
}

TEST_CASE("derived streams are independent of parent consumption") {
    Rng parent(99);
    Rng child_before = parent.derive("init");
    (void)parent.next_u64();
    CHECK(parent.derive("init").next_u64() != 0);
    // derive() keys on the seed only.
    CHECK(parent.derive("init") == child_before);
    CHECK(parent.derive("init").seed() != parent.derive("shuffle").seed());
    CHECK(parent.derive(std::uint64_t{0}).seed() != parent.derive(std::uint64_t{1}).seed());
}

TEST_CASE("property: norm identity and triangle inequality") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng.below(64);
        double scale = std::pow(10.0, rng.uniform(-5.0, 5.0));
        ParamVector x = rng_uniform(rng, -scale, scale, n);
        ParamVector y = rng_uniform(rng, -scale, scale, n);

        double sum_sq = 0.0;
        for (double xi : x.values()) sum_sq += xi * xi;
        const double nx = l2_norm(x);
        CHECK(std::abs(nx * nx - sum_sq) <= 1e-12 * sum_sq);
        CHECK(l2_norm(x + y) <= nx + l2_norm(y) + 1e-12 * scale);
    }
}

TEST_CASE("property: replay from the same seed is bitwise identical") {
    auto sequence = [](std::uint64_t seed) {
        Rng rng(seed);
        ParamVector a = rng_uniform(rng, -1.0, 1.0, 17);
        ParamVector b = rng_uniform(rng, 0.0, 5.0, 17);
        std::vector<double> normals;
        for (int i = 0; i < 17; ++i) normals.push_back(rng.normal());
        return axpy(rng.uniform(), a, b) + ParamVector::from(normals);
    };
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
        CHECK(sequence(seed) == sequence(seed));
    }
}

TEST_CASE("normal draws have roughly unit moments") {
    Rng rng(5);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation") {
    std::vector<int> items(100);
    for (int i = 0; i < 100; ++i) items[static_cast<std::size_t>(i)] = i;
    Rng rng(3);
    shuffle(std::span<int>(items), rng);
    std::vector<int> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    CHECK(items != sorted);
}
