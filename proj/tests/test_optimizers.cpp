#include "adaptopt/optimizers.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace adaptopt;

namespace {

HyperParams hp_with_lr(double eta0) {
    HyperParams hp;
    hp.eta0 = eta0;
    return hp;
}

StepResult step(OptimizerKind kind, const ParamVector &theta, const ParamVector &g, const HyperParams &hp) {
    return optimizer_step(init_state(kind, theta.shape()), theta, g, hp);
}

}    // namespace

TEST_CASE("sgd examples") {
    auto r = step(OptimizerKind::Sgd, ParamVector::from({1.0}), ParamVector::from({2.0}), hp_with_lr(0.1));
    CHECK(r.theta[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(r.state.t == 1);

    auto z = step(OptimizerKind::Sgd, ParamVector::from({1.0, -1.0}), ParamVector::from({0.0, 0.0}),
                  hp_with_lr(0.1));
    CHECK(z.theta == ParamVector::from({1.0, -1.0}));
}

TEST_CASE("momentum accumulates velocity") {
    HyperParams hp = hp_with_lr(0.1);
    hp.mu = 0.5;
    OptimizerState s = init_state(OptimizerKind::Momentum, Shape{1});
    ParamVector theta = ParamVector::from({0.0});
    const ParamVector g = ParamVector::from({1.0});
    auto r1 = momentum_step(std::move(s), theta, g, hp);
    CHECK(r1.state.v->operator[](0) == 1.0);
    CHECK(r1.theta[0] == doctest::Approx(-0.1));
    auto r2 = momentum_step(std::move(r1.state), r1.theta, g, hp);
    CHECK(r2.state.v->operator[](0) == 1.5);
    CHECK(r2.theta[0] == doctest::Approx(-0.25));
}

TEST_CASE("adagrad and rmsprop first steps") {
    HyperParams hp = hp_with_lr(0.1);
    auto a = step(OptimizerKind::AdaGrad, ParamVector::from({1.0}), ParamVector::from({-4.0}), hp);
    // v = 16; theta = 1 + 0.1 * 4 / 4
    CHECK(a.theta[0] == doctest::Approx(1.1));

    hp.rho = 0.75;
    auto r = step(OptimizerKind::RmsProp, ParamVector::from({1.0}), ParamVector::from({2.0}), hp);
    // v = 0.25 * 4 = 1; theta = 1 - 0.1 * 2 / 1
    CHECK(r.theta[0] == doctest::Approx(0.8));
}

TEST_CASE("adam first step moves by eta0 against the gradient sign") {
    HyperParams hp = hp_with_lr(1e-3);
    auto r = step(OptimizerKind::Adam, ParamVector::from({1.0}), ParamVector::from({2.0}), hp);
    // m_hat = 2, v_hat = 4, step = 1e-3 * 2 / (2 + 1e-8)
    CHECK(std::abs(r.theta[0] - (1.0 - 1e-3 * 2.0 / (2.0 + 1e-8))) <= 1e-12);
    CHECK(std::abs(r.theta[0] - 0.999) <= 1e-10);

    auto neg = step(OptimizerKind::Adam, ParamVector::from({0.0, 0.0}), ParamVector::from({-5.0, 0.5}), hp);
    CHECK(neg.theta[0] > 0.0);
    CHECK(neg.theta[1] < 0.0);
}

TEST_CASE("property: bias-corrected moments of a constant gradient equal the gradient") {
    HyperParams hp = hp_with_lr(1e-4);
    const double c = -1.75;
    OptimizerState s = init_state(OptimizerKind::Adam, Shape{3});
    ParamVector theta = ParamVector::from({0.5, -0.5, 2.0});
    const ParamVector g = ParamVector::filled(Shape{3}, c);
    for (int t = 1; t <= 10000; ++t) {
        auto r = adam_step(std::move(s), std::move(theta), g, hp);
        s = std::move(r.state);
        theta = std::move(r.theta);
        if (t <= 20 || t % 997 == 0 || t == 10000) {
            auto mv = corrected_moments(s);
            for (std::size_t i = 0; i < 3; ++i) {
                CHECK(std::abs(mv.m_hat[i] - c) <= 1e-12 * std::abs(c));
                CHECK(std::abs(mv.v_hat[i] - c * c) <= 1e-12 * c * c);
            }
        }
    }
    CHECK(s.t == 10000);
    CHECK(s.beta1_power == 0.0);    // 0.9^10000 underflows and is flushed
}

TEST_CASE("composite clips before the moments and decays the step size") {
    HyperParams hp = hp_with_lr(1e-2);
    hp.gamma = 0.5;
    hp.clip_value = 1.0;
    OptimizerState s = init_state(OptimizerKind::Composite, Shape{2});
    auto r = composite_step(s, ParamVector::from({0.0, 0.0}), ParamVector::from({30.0, 40.0}), hp, 2);
    CHECK(r.report.clipped);
    CHECK(r.report.pre_clip_grad_norm == 50.0);
    CHECK(r.report.effective_lr == 0.25e-2);
    CHECK(r.state.m->operator[](0) == doctest::Approx(0.1 * 0.6));
    CHECK(r.state.m->operator[](1) == doctest::Approx(0.1 * 0.8));
}

TEST_CASE("composite with gamma 1 and no clipping is Adam bitwise") {
    HyperParams hp = hp_with_lr(3e-3);
    hp.gamma = 1.0;
    hp.clip_value = std::nullopt;
    Rng rng(8);
    OptimizerState a = init_state(OptimizerKind::Adam, Shape{5});
    OptimizerState c = init_state(OptimizerKind::Composite, Shape{5});
    ParamVector ta = rng_uniform(rng, -1.0, 1.0, 5);
    ParamVector tc = ta;
    for (int t = 0; t < 200; ++t) {
        const ParamVector g = rng_uniform(rng, -10.0, 10.0, 5);
        auto ra = adam_step(std::move(a), std::move(ta), g, hp);
        auto rc = composite_step(std::move(c), std::move(tc), g, hp, t);
        a = std::move(ra.state);
        ta = std::move(ra.theta);
        c = std::move(rc.state);
        tc = std::move(rc.theta);
        REQUIRE(ta == tc);
    }
    CHECK(*a.m == *c.m);
    CHECK(*a.v == *c.v);
}

TEST_CASE("momentum with mu 0 is sgd bitwise") {
    HyperParams hp = hp_with_lr(0.05);
    hp.mu = 0.0;
    Rng rng(9);
    ParamVector ts = rng_uniform(rng, -1.0, 1.0, 4);
    ParamVector tm = ts;
    OptimizerState ss = init_state(OptimizerKind::Sgd, Shape{4});
    OptimizerState sm = init_state(OptimizerKind::Momentum, Shape{4});
    for (int t = 0; t < 100; ++t) {
        const ParamVector g = rng_uniform(rng, -3.0, 3.0, 4);
        auto rs = sgd_step(std::move(ss), std::move(ts), g, hp);
        auto rm = momentum_step(std::move(sm), std::move(tm), g, hp);
        ss = std::move(rs.state);
        ts = std::move(rs.theta);
        sm = std::move(rm.state);
        tm = std::move(rm.theta);
        REQUIRE(ts == tm);
    }
}

TEST_CASE("invalid inputs are rejected") {
    HyperParams hp;
    CHECK_NOTHROW(hp.validate());
    hp.beta1 = 1.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
    hp = HyperParams{};
    hp.eta0 = -1.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
    hp = HyperParams{};
    hp.clip_value = 0.0;
    CHECK_THROWS_AS(hp.validate(), std::invalid_argument);

    const ParamVector theta = ParamVector::from({1.0, 2.0});
    CHECK_THROWS_AS(step(OptimizerKind::Adam, theta, ParamVector::from({1.0}), HyperParams{}), std::invalid_argument);
    CHECK_THROWS(sgd_step(init_state(OptimizerKind::Adam, Shape{2}), theta, theta, HyperParams{}));
    CHECK_THROWS(corrected_moments(init_state(OptimizerKind::Sgd, Shape{2})));
}

TEST_CASE("names round-trip") {
    for (OptimizerKind k : all_optimizer_kinds) {
        CHECK(parse_optimizer_kind(to_string(k)) == k);
    }
    CHECK(parse_optimizer_kind("ours") == OptimizerKind::Composite);
    CHECK(display_name(OptimizerKind::Composite) == "Ours");
    CHECK_THROWS(parse_optimizer_kind("lbfgs"));
    for (std::size_t i = 0; i < all_optimizer_kinds.size(); ++i) {
        CHECK(report_rank(all_optimizer_kinds[i]) == i);
    }
}

TEST_CASE("property: adam steps are bounded by eta0 when gradients are steady") {
    Rng rng(31);
    HyperParams hp = hp_with_lr(1e-3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        ParamVector theta = rng_uniform(rng, -1.0, 1.0, n);
        const ParamVector g = rng_uniform(rng, -100.0, 100.0, n);
        OptimizerState s = init_state(OptimizerKind::Adam, theta.shape());
        for (int t = 0; t < 20; ++t) {
            auto r = adam_step(std::move(s), theta, g, hp);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::abs(r.theta[i] - theta[i]) <= hp.eta0 * (1.0 + 1e-9));
            }
            s = std::move(r.state);
            theta = std::move(r.theta);
        }
    }
}
