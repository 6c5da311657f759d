#pragma once

#include <vector>

#include "maba/model.hpp"

namespace maba {

// Exact value/Q solution of the binary model under the always-a_1 policy.
// Arms are indexed in sorted order; gap(s, a_1) = 0 by construction.
struct ValueSolution {
    double v0 = 0.0, v1 = 0.0;
    std::vector<double> q0, q1;      // Q*(0, a_i), Q*(1, a_i)
    std::vector<double> gap0, gap1;  // V*(s) - Q*(s, a_i)

    double value(int state) const { return state ? v1 : v0; }
    double q(int state, int arm) const { return state ? q1[arm] : q0[arm]; }
    double gap(int state, int arm) const { return state ? gap1[arm] : gap0[arm]; }
};

enum class GapOrientation { Standard, Opposite, Degenerate };

enum class ConditionVerdict { Holds, Fails, NotApplicable };

// Asymptotic regret-bound constants: coefficients of log K.
struct BoundConstants {
    double ulcb_ub = 0.0;
    double klulcb_ub = 0.0;
    double lower_bound = 0.0;  // equals klulcb_ub
    double ucb_ref = 0.0;
    double klucb_ref = 0.0;
    GapOrientation orientation = GapOrientation::Standard;
    bool degenerate_orientation = false;  // ties treated as Standard
};

struct EpisodeLengths {
    double from_state0 = 0.0;
    double from_state1 = 0.0;
    double max() const { return from_state1 > from_state0 ? from_state1 : from_state0; }
};

ValueSolution solve_binary_values(const BanditInstance& instance);
GapOrientation check_orientation(const BanditInstance& instance, const ValueSolution& vs);
ConditionVerdict sufficient_condition(const BinaryAbandonment& ab);
BoundConstants bound_constants(const BanditInstance& instance);
bool verify_optimal_policy(const BanditInstance& instance);
EpisodeLengths expected_episode_length(const BanditInstance& instance);

// Grid value-function solution of the general-state model (value iteration
// with piecewise-linear interpolation). Self-contained: carries the arm means
// and abandonment curve so V, Q and gaps can be queried off-grid.
class GeneralValueSolution {
public:
    GeneralValueSolution(std::vector<double> grid_values, GeneralAbandonment abandonment,
                         std::vector<double> means, double residual, long iterations,
                         bool converged);

    const std::vector<double>& grid_values() const { return values_; }
    int grid_size() const { return static_cast<int>(values_.size()); }
    double residual() const { return residual_; }
    long iterations() const { return iterations_; }
    bool converged() const { return converged_; }

    double value_at(double s) const { return interp(s); }
    double q_at(double s, int arm) const;
    // gap(s, a) = (mu(a_1) - mu(a)) * [1 + (1-q(hi)) V(hi) - (1-q(lo)) V(lo)],
    // exactly zero for a_1.
    double gap_at(double s, int arm) const;

private:
    double interp(double s) const;

    std::vector<double> values_;
    GeneralAbandonment abandonment_;
    std::vector<double> means_;
    double residual_;
    long iterations_;
    bool converged_;
};

GeneralValueSolution solve_general_values(const BanditInstance& instance, int grid_size = 1024,
                                          double tol = 1e-10, long max_iterations = 1000000);
bool check_gap_monotonicity(const BanditInstance& instance, const GeneralValueSolution& vs);

// Asymptotic constants for the general model: the DISC bounds evaluate the
// gap at s = (n-1)/n, the lower bound at s = 1.
struct GeneralBoundConstants {
    int n_bins = 4;
    double disc_ulcb_ub = 0.0;
    double disc_klulcb_ub = 0.0;
    double lower_bound = 0.0;
};

GeneralBoundConstants general_bound_constants(const BanditInstance& instance,
                                              const GeneralValueSolution& vs, int n_bins);

}  // namespace maba
