#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "maba/kl.hpp"
#include "maba/solver.hpp"
#include "test_support.hpp"

using namespace maba;

namespace {

// Independent oracle: Monte-Carlo rollout of the always-a_1 policy. Returns
// the sample mean episodic reward and its standard error.
std::pair<double, double> rollout_value(const BanditInstance& inst, int start_state, long episodes,
                                        Rng& rng) {
    double sum = 0.0, sumsq = 0.0;
    for (long e = 0; e < episodes; ++e) {
        double total = 0.0;
        int s = start_state;
        for (long step = 0; step < 1000000; ++step) {
            const StepOutcome out = inst.binary_step(s, 0, rng);
            total += out.reward;
            if (out.abandoned) break;
            s = out.reward;
        }
        sum += total;
        sumsq += total * total;
    }
    const double mean = sum / episodes;
    const double var = (sumsq - episodes * mean * mean) / (episodes - 1.0);
    return {mean, std::sqrt(var / episodes)};
}

std::pair<double, double> rollout_general_value(const BanditInstance& inst, double start,
                                                long episodes, Rng& rng) {
    double sum = 0.0, sumsq = 0.0;
    for (long e = 0; e < episodes; ++e) {
        double total = 0.0;
        double s = start;
        for (long step = 0; step < 1000000; ++step) {
            const StepOutcome out = inst.general_step(s, 0, rng);
            total += out.reward;
            if (out.abandoned) break;
            s = out.next_state;
        }
        sum += total;
        sumsq += total * total;
    }
    const double mean = sum / episodes;
    const double var = (sumsq - episodes * mean * mean) / (episodes - 1.0);
    return {mean, std::sqrt(var / episodes)};
}

}  // namespace

TEST_CASE("simple instance: hand-solved values, Q table and gaps") {
    const ValueSolution vs = solve_binary_values(testing::simple_instance());
    CHECK(vs.v1 == doctest::Approx(99.0).epsilon(1e-12));
    CHECK(vs.v0 == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(vs.q1[1] == doctest::Approx(98.0).epsilon(1e-12));
    CHECK(vs.q0[1] == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(vs.gap1[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(vs.gap0[1] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(vs.gap0[0] == 0.0);
    CHECK(vs.gap1[0] == 0.0);
}

TEST_CASE("closed forms for the q(0,0)=1 family") {
    // gap(1,a_i) = delta/(1-mu_1), gap(0,a_i) = delta/(1-mu_1)^2
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const double mu1 = 0.2 + 0.7 * rng.uniform01();
        const double mu2 = mu1 * rng.uniform01();
        BanditInstance inst(ArmSet({mu1, mu2}), BinaryAbandonment(1.0, 0.0, 0.0, 0.0));
        const ValueSolution vs = solve_binary_values(inst);
        const double delta = mu1 - mu2;
        CHECK(vs.gap1[1] == doctest::Approx(delta / (1.0 - mu1)).epsilon(1e-10));
        CHECK(vs.gap0[1] == doctest::Approx(delta / ((1.0 - mu1) * (1.0 - mu1))).epsilon(1e-10));
    }
}

TEST_CASE("immediate abandonment collapses to a one-step problem") {
    const ValueSolution vs = solve_binary_values(testing::one_step_instance());
    CHECK(vs.v0 == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(vs.v1 == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(vs.gap0[1] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(vs.gap1[1] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("solver matches Monte-Carlo rollouts of the genie policy") {
    Rng rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
        const BanditInstance inst = testing::random_instance(rng, 2 + (trial % 3));
        const ValueSolution vs = solve_binary_values(inst);
        for (int s : {0, 1}) {
            const auto [mean, se] = rollout_value(inst, s, 100000, rng);
            // 99% band
            CHECK(std::abs(mean - vs.value(s)) < 2.5758 * se + 1e-9);
        }
    }
}

TEST_CASE("orientation classification") {
    {
        const BanditInstance inst = testing::simple_instance();
        CHECK(check_orientation(inst, solve_binary_values(inst)) == GapOrientation::Standard);
    }
    {
        const BanditInstance inst = testing::soft_instance();
        CHECK(check_orientation(inst, solve_binary_values(inst)) == GapOrientation::Standard);
    }
    {
        // q constant in the state argument: the arm-independent factor is 0
        BanditInstance inst(ArmSet({0.9, 0.8}), BinaryAbandonment(0.4, 0.2, 0.4, 0.2));
        CHECK(check_orientation(inst, solve_binary_values(inst)) == GapOrientation::Degenerate);
    }
}

TEST_CASE("sufficient condition (four cases)") {
    CHECK(sufficient_condition(BinaryAbandonment(1.0, 0.0, 0.0, 0.0)) ==
          ConditionVerdict::Holds);
    CHECK(sufficient_condition(BinaryAbandonment(0.8, 0.2, 0.2, 0.1)) ==
          ConditionVerdict::Holds);
    CHECK(sufficient_condition(BinaryAbandonment(0.3, 0.2, 0.3, 0.1)) ==
          ConditionVerdict::NotApplicable);  // q00 == q10
    // 0.7/0.05 = 14 > min{0.2/0.9, 0.1/0.15}
    CHECK(sufficient_condition(BinaryAbandonment(0.9, 0.8, 0.85, 0.1)) ==
          ConditionVerdict::Fails);
}

TEST_CASE("opposite orientation swaps the exploration state in the constants") {
    // q(0,.) = q(1,0) = 0.5 but q(1,1) = 0.2: a suboptimal pull costs more in
    // state 1, so the comparison factor (q00-q10) V0 - (q01-q11) V1 < 0
    BanditInstance inst(ArmSet({0.9, 0.8}), BinaryAbandonment(0.5, 0.5, 0.5, 0.2));
    const ValueSolution vs = solve_binary_values(inst);
    CHECK(check_orientation(inst, vs) == GapOrientation::Opposite);
    CHECK(vs.gap1[1] > vs.gap0[1]);

    const BoundConstants bc = bound_constants(inst);
    CHECK(bc.orientation == GapOrientation::Opposite);
    const double delta2 = 2.0 * 0.1 * 0.1;
    const double kl = bernoulli_kl(0.8, 0.9);
    // exploration state is 0 under the opposite case: its gap drives the
    // ULCB/KL-ULCB constants while the state-blind references pay gap(1,.)
    CHECK(bc.ulcb_ub == doctest::Approx(vs.gap0[1] / delta2).epsilon(1e-12));
    CHECK(bc.klulcb_ub == doctest::Approx(vs.gap0[1] / kl).epsilon(1e-12));
    CHECK(bc.ucb_ref == doctest::Approx(vs.gap1[1] / delta2).epsilon(1e-12));
    CHECK(bc.klucb_ref == doctest::Approx(vs.gap1[1] / kl).epsilon(1e-12));
    CHECK(bc.ucb_ref >= bc.ulcb_ub);
    CHECK(bc.klucb_ref >= bc.klulcb_ub);
}

TEST_CASE("bound constants on the simple instance (frozen oracle values)") {
    const BoundConstants bc = bound_constants(testing::simple_instance());
    CHECK(bc.orientation == GapOrientation::Standard);
    CHECK(bc.ulcb_ub == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(bc.klulcb_ub == doctest::Approx(22.520996985245290).epsilon(1e-10));
    CHECK(bc.lower_bound == bc.klulcb_ub);
    CHECK(bc.ucb_ref == doctest::Approx(500.0).epsilon(1e-10));
    CHECK(bc.klucb_ref == doctest::Approx(225.20996985245290).epsilon(1e-10));
}

TEST_CASE("bound constants: additivity over identical suboptimal arms") {
    BanditInstance doubled(ArmSet({0.9, 0.8, 0.8}), BinaryAbandonment(1.0, 0.0, 0.0, 0.0));
    const BoundConstants one = bound_constants(testing::simple_instance());
    const BoundConstants two = bound_constants(doubled);
    CHECK(two.ulcb_ub == doctest::Approx(2.0 * one.ulcb_ub).epsilon(1e-12));
    CHECK(two.klulcb_ub == doctest::Approx(2.0 * one.klulcb_ub).epsilon(1e-12));
    CHECK(two.ucb_ref == doctest::Approx(2.0 * one.ucb_ref).epsilon(1e-12));
    CHECK(two.klucb_ref == doctest::Approx(2.0 * one.klucb_ref).epsilon(1e-12));
    CHECK_THROWS_AS(bound_constants(BanditInstance(ArmSet({0.8, 0.8}),
                                                   BinaryAbandonment(1, 0, 0, 0))),
                    std::invalid_argument);
}

TEST_CASE("bound constants on the soft instance (independent oracle values)") {
    // 30-digit solve: gap1 = 0.2581648522550544, gap0 = 0.5660964230171073
    const BoundConstants bc = bound_constants(testing::soft_instance());
    CHECK(bc.ulcb_ub == doctest::Approx(12.908242612752722).epsilon(1e-10));
    CHECK(bc.klulcb_ub == doctest::Approx(5.8141298593323767).epsilon(1e-10));
    CHECK(bc.ucb_ref == doctest::Approx(28.304821150855365).epsilon(1e-10));
    CHECK(bc.klucb_ref == doctest::Approx(12.749055836126416).epsilon(1e-10));
}

TEST_CASE("ulcb/klucb bound ordering invariants (Standard orientation)") {
    Rng rng(13);
    int standard_seen = 0;
    for (int trial = 0; trial < 100; ++trial) {
        BanditInstance inst = testing::random_instance(rng, 2);
        if (inst.arms().degenerate()) continue;
        const BoundConstants bc = bound_constants(inst);
        CHECK(bc.klulcb_ub == bc.lower_bound);
        CHECK(bc.ulcb_ub >= bc.klulcb_ub - 1e-12);  // Pinsker
        if (bc.orientation == GapOrientation::Standard) {
            ++standard_seen;
            CHECK(bc.ucb_ref >= bc.ulcb_ub - 1e-12);
            CHECK(bc.klucb_ref >= bc.klulcb_ub - 1e-12);
        }
    }
    CHECK(standard_seen > 0);
}

TEST_CASE("brute-force policy enumeration confirms the genie policy") {
    CHECK(verify_optimal_policy(testing::simple_instance()));
    CHECK(verify_optimal_policy(
        BanditInstance(ArmSet({0.5, 0.5}), BinaryAbandonment(0.7, 0.1, 0.2, 0.0))));
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        CHECK(verify_optimal_policy(testing::random_instance(rng, 2 + (trial % 3))));
    }
}

TEST_CASE("expected episode lengths and the Wald identity") {
    const EpisodeLengths len = expected_episode_length(testing::simple_instance());
    CHECK(len.from_state1 == doctest::Approx(110.0).epsilon(1e-12));
    CHECK(len.from_state0 == doctest::Approx(100.0).epsilon(1e-12));

    const EpisodeLengths one = expected_episode_length(testing::one_step_instance());
    CHECK(one.from_state0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.from_state1 == doctest::Approx(1.0).epsilon(1e-14));

    // V*(s) = mu(a_1) E[I|s] for Bernoulli(mu(a_1)) rewards
    Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const BanditInstance inst = testing::random_instance(rng, 2);
        const ValueSolution vs = solve_binary_values(inst);
        const EpisodeLengths el = expected_episode_length(inst);
        const double mu1 = inst.arms().mean(0);
        CHECK(vs.v0 == doctest::Approx(mu1 * el.from_state0).epsilon(1e-10));
        CHECK(vs.v1 == doctest::Approx(mu1 * el.from_state1).epsilon(1e-10));
    }
}

TEST_CASE("general solver: constant abandonment has a closed form") {
    // q = c everywhere: V*(s) = mu_1 / c, independent of s
    for (double c : {1.0, 0.5, 0.2}) {
        BanditInstance inst(ArmSet({0.9, 0.8}),
                            GeneralAbandonment::table({{0.0, c}, {1.0, c}}, 0.5));
        const GeneralValueSolution vs = solve_general_values(inst, 128, 1e-12);
        CHECK(vs.converged());
        for (double s : {0.0, 0.31, 0.5, 1.0}) {
            CHECK(vs.value_at(s) == doctest::Approx(0.9 / c).epsilon(1e-8));
            CHECK(vs.gap_at(s, 1) == doctest::Approx(0.1).epsilon(1e-8));
        }
    }
}

TEST_CASE("general solver: monotone value iteration and grid monotonicity") {
    const BanditInstance inst = testing::log_general_instance(50.0, 0.5);
    // from V = 0 the iterates are pointwise non-decreasing
    const GeneralValueSolution v1 = solve_general_values(inst, 256, 1e-10, 1);
    const GeneralValueSolution v2 = solve_general_values(inst, 256, 1e-10, 2);
    const GeneralValueSolution v5 = solve_general_values(inst, 256, 1e-10, 5);
    for (int i = 0; i < 256; ++i) {
        CHECK(v1.grid_values()[i] <= v2.grid_values()[i] + 1e-14);
        CHECK(v2.grid_values()[i] <= v5.grid_values()[i] + 1e-14);
    }

    const GeneralValueSolution vs = solve_general_values(inst, 1024, 1e-10);
    CHECK(vs.converged());
    double prev = vs.grid_values().front();
    for (double v : vs.grid_values()) {
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("general solver matches a Monte-Carlo rollout") {
    const BanditInstance inst = testing::log_general_instance(50.0, 0.5);
    const GeneralValueSolution vs = solve_general_values(inst, 2048, 1e-11);
    Rng rng(2077);
    const auto [mean, se] = rollout_general_value(inst, 1.0, 40000, rng);
    CHECK(std::abs(mean - vs.value_at(1.0)) < 2.5758 * se + 1e-6);
}

TEST_CASE("gap monotonicity of the log family (numeric check)") {
    for (double c6 : {5.0, 50.0, 1000.0}) {
        const BanditInstance inst = testing::log_general_instance(c6, 0.5);
        const GeneralValueSolution vs = solve_general_values(inst, 1024, 1e-10);
        CHECK(vs.converged());
        CHECK(check_gap_monotonicity(inst, vs));
    }
    // constant curve: gaps state-independent, non-strictly monotone
    BanditInstance flat(ArmSet({0.9, 0.8}), GeneralAbandonment::table({{0.0, 0.5}, {1.0, 0.5}}, 0.5));
    CHECK(check_gap_monotonicity(flat, solve_general_values(flat, 128, 1e-11)));
}

TEST_CASE("general bound constants evaluate the gap at the top bin edge") {
    const BanditInstance inst = testing::log_general_instance(1000.0, 0.5);
    const GeneralValueSolution vs = solve_general_values(inst, 1024, 1e-10);
    const GeneralBoundConstants gb = general_bound_constants(inst, vs, 4);
    const double g075 = vs.gap_at(0.75, 1);
    const double g1 = vs.gap_at(1.0, 1);
    const double kl = bernoulli_kl(0.8, 0.9);
    CHECK(gb.disc_ulcb_ub == doctest::Approx(g075 / 0.02).epsilon(1e-12));
    CHECK(gb.disc_klulcb_ub == doctest::Approx(g075 / kl).epsilon(1e-12));
    CHECK(gb.lower_bound == doctest::Approx(g1 / kl).epsilon(1e-12));
    // gap monotone => the discretized constant dominates the lower bound
    CHECK(gb.disc_klulcb_ub >= gb.lower_bound);
}
