#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "maba/model.hpp"
#include "test_support.hpp"

using namespace maba;

TEST_CASE("arm set normalizes order and keeps the user permutation") {
    ArmSet arms({0.3, 0.9, 0.5});
    CHECK(arms.size() == 3);
    CHECK(arms.mean(0) == 0.9);
    CHECK(arms.mean(1) == 0.5);
    CHECK(arms.mean(2) == 0.3);
    CHECK(arms.user_index(0) == 1);
    CHECK(arms.user_index(1) == 2);
    CHECK(arms.user_index(2) == 0);
    CHECK_FALSE(arms.degenerate());
    CHECK(ArmSet({0.5, 0.5}).degenerate());
    CHECK_THROWS_AS(ArmSet({0.9}), std::invalid_argument);
    CHECK_THROWS_AS(ArmSet({1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(ArmSet({0.5, -0.1}), std::invalid_argument);
}

TEST_CASE("binary abandonment enforces the monotonicity assumption") {
    CHECK_NOTHROW(BinaryAbandonment(1.0, 0.0, 0.0, 0.0));
    CHECK_NOTHROW(BinaryAbandonment(0.8, 0.2, 0.2, 0.1));
    CHECK_THROWS_WITH_AS(BinaryAbandonment(0.0, 0.0, 0.0, 0.0),
                         doctest::Contains("q(0,0) > 0"), std::invalid_argument);
    CHECK_THROWS_AS(BinaryAbandonment(0.5, 0.6, 0.2, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(BinaryAbandonment(0.5, 0.2, 0.2, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(BinaryAbandonment(1.2, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("deterministic arms and reward frequencies") {
    BanditInstance inst(ArmSet({0.9, 0.0}), BinaryAbandonment(1.0, 0.0, 0.0, 0.0));
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) CHECK(inst.sample_reward(1, rng) == 0);
    long ones = 0;
    const long n = 1000000;
    for (long i = 0; i < n; ++i) ones += inst.sample_reward(0, rng);
    // binomial 99.9% band: 3.3 sigma ~ 0.001 at p = 0.9, n = 1e6
    CHECK(std::abs(static_cast<double>(ones) / n - 0.9) < 0.001);
    CHECK_THROWS_AS(inst.sample_reward(2, rng), std::invalid_argument);
    CHECK_THROWS_AS(inst.sample_reward(-1, rng), std::invalid_argument);
}

TEST_CASE("binary_step degenerate abandonment rows") {
    Rng rng(11);
    BanditInstance inst = testing::simple_instance();  // q00=1, others 0
    for (int i = 0; i < 300; ++i) {
        const StepOutcome out = inst.binary_step(0, 0, rng);
        if (out.reward == 0) {
            CHECK(out.abandoned);  // q(0,0) = 1
        } else {
            CHECK_FALSE(out.abandoned);  // q(0,1) = 0
        }
    }
    for (int i = 0; i < 300; ++i) {
        const StepOutcome out = inst.binary_step(1, 0, rng);
        CHECK_FALSE(out.abandoned);  // q(1,.) = 0
        CHECK(out.next_state == out.reward);
    }
    CHECK_THROWS_AS(inst.binary_step(2, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(testing::log_general_instance().binary_step(1, 0, rng),
                    std::bad_variant_access);
}

TEST_CASE("transition rows match the table and sum to one") {
    // s=1, mu=0.9, q(1,1)=0.1, q(1,0)=0.2
    BanditInstance inst(ArmSet({0.9, 0.8}), BinaryAbandonment(0.9, 0.3, 0.2, 0.1));
    TransitionRow row = inst.transition_probs(1.0, 0);
    CHECK(row.p_high == doctest::Approx(0.81).epsilon(1e-14));
    CHECK(row.p_low == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(row.p_terminal == doctest::Approx(0.11).epsilon(1e-14));

    TransitionRow simple = testing::simple_instance().transition_probs(1.0, 0);
    CHECK(simple.p_low == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(simple.p_high == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(simple.p_terminal == doctest::Approx(0.0).epsilon(1e-14));

    // P(g | s=0, a_1) = (1-mu) q(0,0) + mu q(0,1) = 0.1 on the simple instance
    CHECK(testing::simple_instance().transition_probs(0.0, 0).p_terminal ==
          doctest::Approx(0.1).epsilon(1e-14));

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        BanditInstance random = testing::random_instance(rng, 3);
        for (int arm = 0; arm < 3; ++arm) {
            for (double s : {0.0, 1.0}) {
                const TransitionRow r = random.transition_probs(s, arm);
                CHECK(r.p_low >= 0.0);
                CHECK(r.p_high >= 0.0);
                CHECK(r.p_terminal >= -1e-12);
                CHECK(r.p_low + r.p_high + r.p_terminal == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("empirical binary transition frequencies match the kernel") {
    BanditInstance inst = testing::soft_instance();
    Rng rng(99);
    const long n = 1000000;
    for (double s : {0.0, 1.0}) {
        const TransitionRow row = inst.transition_probs(s, 0);
        long low = 0, high = 0, terminal = 0;
        for (long i = 0; i < n; ++i) {
            const StepOutcome out = inst.binary_step(s > 0.5 ? 1 : 0, 0, rng);
            if (out.abandoned)
                ++terminal;
            else if (out.next_state > 0.5)
                ++high;
            else
                ++low;
        }
        auto within3sigma = [n](long count, double p) {
            const double sd = std::sqrt(p * (1.0 - p) / n);
            return std::abs(static_cast<double>(count) / n - p) <= 3.0 * sd;
        };
        CHECK(within3sigma(low, row.p_low));
        CHECK(within3sigma(high, row.p_high));
        CHECK(within3sigma(terminal, row.p_terminal));
    }
}

TEST_CASE("general model: moving-average state and log family") {
    BanditInstance inst = testing::log_general_instance(1000.0, 0.5);
    const auto& ab = inst.general_abandonment();
    CHECK(ab.q(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ab.q(1.0) == doctest::Approx(0.0).epsilon(1e-14));

    // monotone non-increasing on a 1000-point scan
    double prev = ab.q(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double q = ab.q(i / 1000.0);
        CHECK(q <= prev + 1e-15);
        prev = q;
    }

    Rng rng(17);
    double s = 1.0;
    for (int i = 0; i < 5000; ++i) {
        const StepOutcome out = inst.general_step(s, 0, rng);
        CHECK(out.next_state == doctest::Approx(0.5 * s + 0.5 * out.reward).epsilon(1e-15));
        CHECK(out.next_state >= 0.0);
        CHECK(out.next_state <= 1.0);
        s = out.abandoned ? 1.0 : out.next_state;
    }
    CHECK_THROWS_AS(inst.general_step(1.5, 0, rng), std::invalid_argument);

    // fixed point: s = 1 with reward 1 stays at 1 (theta arbitrary)
    BanditInstance fp(ArmSet({0.9, 0.0}), GeneralAbandonment::log_family(5.0, 0.3));
    for (int i = 0; i < 200; ++i) {
        const StepOutcome out = fp.general_step(1.0, 0, rng);
        if (out.reward == 1) CHECK(out.next_state == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("tabulated abandonment curves") {
    auto curve = GeneralAbandonment::table({{0.0, 1.0}, {0.5, 0.4}, {1.0, 0.2}}, 0.5);
    CHECK(curve.q(0.0) == 1.0);
    CHECK(curve.q(0.25) == doctest::Approx(0.7));
    CHECK(curve.q(0.5) == doctest::Approx(0.4));
    CHECK(curve.q(0.75) == doctest::Approx(0.3));
    CHECK(curve.q(1.0) == doctest::Approx(0.2));
    double prev = curve.q(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double q = curve.q(i / 1000.0);
        CHECK(q <= prev + 1e-15);
        prev = q;
    }
    // violations rejected at construction
    CHECK_THROWS_AS(GeneralAbandonment::table({{0.0, 0.5}, {1.0, 0.6}}, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(GeneralAbandonment::table({{0.1, 1.0}, {1.0, 0.5}}, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(GeneralAbandonment::table({{0.0, 1.0}, {0.5, 0.0}, {1.0, 0.0}}, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(GeneralAbandonment::log_family(1000.0, 1.0), std::invalid_argument);
}

TEST_CASE("initial state distributions are validated and sampled") {
    CHECK_THROWS_AS(BanditInstance(ArmSet({0.9, 0.8}), BinaryAbandonment(1, 0, 0, 0),
                                   InitialState{{{0.5, 1.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(BanditInstance(ArmSet({0.9, 0.8}), BinaryAbandonment(1, 0, 0, 0),
                                   InitialState{{{1.0, 0.5}}}),
                    std::invalid_argument);
    BanditInstance mixed(ArmSet({0.9, 0.8}), BinaryAbandonment(1, 0, 0, 0),
                         InitialState{{{0.0, 0.25}, {1.0, 0.75}}});
    Rng rng(123);
    long ones = 0;
    const long n = 200000;
    for (long i = 0; i < n; ++i) ones += mixed.initial_state().sample(rng) > 0.5 ? 1 : 0;
    CHECK(std::abs(static_cast<double>(ones) / n - 0.75) < 0.005);
}
