#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "maba/rng.hpp"

namespace maba {

// Arm means, normalized to non-increasing order at construction. The user's
// original ordering is kept so reports can be mapped back.
class ArmSet {
public:
    explicit ArmSet(std::vector<double> means_user_order);

    int size() const { return static_cast<int>(sorted_.size()); }
    double mean(int arm) const { return sorted_[arm]; }
    const std::vector<double>& means() const { return sorted_; }
    const std::vector<double>& means_user_order() const { return user_; }

    // sorted index -> position in the user-supplied list
    int user_index(int sorted_arm) const { return perm_[sorted_arm]; }
    // optimality gap mu(a_1) - mu(a_i)
    double gap(int arm) const { return sorted_[0] - sorted_[arm]; }
    // true when mu(a_1) == mu(a_2); bound constants are undefined then
    bool degenerate() const { return sorted_[0] == sorted_[1]; }

private:
    std::vector<double> user_;
    std::vector<double> sorted_;
    std::vector<int> perm_;
};

// Binary-model abandonment table q(state, reward).
class BinaryAbandonment {
public:
    BinaryAbandonment(double q00, double q01, double q10, double q11);

    double q(int state, int reward) const { return q_[state][reward]; }
    double q00() const { return q_[0][0]; }
    double q01() const { return q_[0][1]; }
    double q10() const { return q_[1][0]; }
    double q11() const { return q_[1][1]; }

private:
    double q_[2][2];
};

// General-model abandonment curve q : [0,1] -> [0,1], non-increasing, plus
// the forgetting factor of the state's exponential moving average.
class GeneralAbandonment {
public:
    static GeneralAbandonment log_family(double c6, double theta);
    static GeneralAbandonment table(std::vector<std::pair<double, double>> points,
                                    double theta);

    double q(double s) const;
    double theta() const { return theta_; }
    bool is_log_family() const { return log_c6_ > 0.0; }
    double c6() const { return log_c6_; }
    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    GeneralAbandonment() = default;

    double theta_ = 0.5;
    double log_c6_ = 0.0;   // > 0 when the parametric log family is used
    double log_norm_ = 1.0; // log(c6 + 1)
    std::vector<std::pair<double, double>> points_;
};

using Abandonment = std::variant<BinaryAbandonment, GeneralAbandonment>;

// Distribution of the episode's initial state. Defaults to a point mass at 1.
struct InitialState {
    std::vector<std::pair<double, double>> support;  // (state value, probability)

    static InitialState point_mass(double value) { return InitialState{{{value, 1.0}}}; }

    double sample(Rng& rng) const {
        if (support.size() == 1) return support.front().first;
        double u = rng.uniform01();
        for (const auto& [value, prob] : support) {
            if (u < prob) return value;
            u -= prob;
        }
        return support.back().first;
    }
};

struct StepOutcome {
    int reward = 0;            // 0 or 1
    bool abandoned = false;    // true: episode reached the terminal state
    double next_state = 0.0;   // meaningful only when !abandoned
};

// One row of the transition kernel: the two non-terminal successors plus the
// terminal mass. Binary model: low = 0, high = 1. General model:
// low = (1-theta) s, high = (1-theta) s + theta.
struct TransitionRow {
    double low_state, high_state;
    double p_low, p_high, p_terminal;
};

// Ground-truth MAB-A model. Immutable after construction and safe to share
// across simulation workers.
class BanditInstance {
public:
    BanditInstance(ArmSet arms, Abandonment abandonment);
    BanditInstance(ArmSet arms, Abandonment abandonment, InitialState initial);

    const ArmSet& arms() const { return arms_; }
    int num_arms() const { return arms_.size(); }
    bool is_binary() const { return std::holds_alternative<BinaryAbandonment>(abandonment_); }
    const BinaryAbandonment& binary_abandonment() const {
        return std::get<BinaryAbandonment>(abandonment_);
    }
    const GeneralAbandonment& general_abandonment() const {
        return std::get<GeneralAbandonment>(abandonment_);
    }
    const InitialState& initial_state() const { return initial_; }

    int sample_reward(int arm, Rng& rng) const;
    StepOutcome binary_step(int state, int arm, Rng& rng) const;
    StepOutcome general_step(double state, int arm, Rng& rng) const;
    TransitionRow transition_probs(double state, int arm) const;

private:
    ArmSet arms_;
    Abandonment abandonment_;
    InitialState initial_;
};

namespace detail {
// Sample an event of probability q without spending a draw on the
// deterministic cases; q(0,0)=1 instances abandon with no terminal-draw cost.
inline bool sample_abandon(double q, Rng& rng) {
    if (q <= 0.0) return false;
    if (q >= 1.0) return true;
    return rng.uniform01() < q;
}
}  // namespace detail

[[noreturn]] void throw_bad_arm();
[[noreturn]] void throw_bad_state();

inline int BanditInstance::sample_reward(int arm, Rng& rng) const {
    if (arm < 0 || arm >= num_arms()) throw_bad_arm();
    return rng.uniform01() < arms_.mean(arm) ? 1 : 0;
}

inline StepOutcome BanditInstance::binary_step(int state, int arm, Rng& rng) const {
    const auto& ab = std::get<BinaryAbandonment>(abandonment_);
    if (state != 0 && state != 1) throw_bad_state();
    const int reward = sample_reward(arm, rng);
    const bool abandon = detail::sample_abandon(ab.q(state, reward), rng);
    return StepOutcome{reward, abandon, static_cast<double>(reward)};
}

inline StepOutcome BanditInstance::general_step(double state, int arm, Rng& rng) const {
    const auto& ab = std::get<GeneralAbandonment>(abandonment_);
    if (!(state >= 0.0 && state <= 1.0)) throw_bad_state();
    const int reward = sample_reward(arm, rng);
    const double next = (1.0 - ab.theta()) * state + ab.theta() * reward;
    const bool abandon = detail::sample_abandon(ab.q(next), rng);
    return StepOutcome{reward, abandon, next};
}

}  // namespace maba
