#include "maba/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "maba/kl.hpp"

namespace maba {

namespace {

// Solve the 2x2 system of the binary Bellman equation under the stationary
// policy (arm_in_0, arm_in_1). With rhs = (mu, mu) this yields the value
// vector; with rhs = (1, 1) the expected episode lengths.
struct TwoByTwo {
    double x0, x1;
};

TwoByTwo solve_policy_system(const BanditInstance& inst, int arm_in_0, int arm_in_1,
                             bool unit_rhs) {
    const auto& ab = inst.binary_abandonment();
    const double mu_a = inst.arms().mean(arm_in_0);
    const double mu_b = inst.arms().mean(arm_in_1);
    // rows: x(s) = r(s) + (1-mu)(1-q(s,0)) x0 + mu (1-q(s,1)) x1
    const double a11 = 1.0 - (1.0 - mu_a) * (1.0 - ab.q00());
    const double a12 = -mu_a * (1.0 - ab.q01());
    const double a21 = -(1.0 - mu_b) * (1.0 - ab.q10());
    const double a22 = 1.0 - mu_b * (1.0 - ab.q11());
    const double b1 = unit_rhs ? 1.0 : mu_a;
    const double b2 = unit_rhs ? 1.0 : mu_b;
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-300))
        throw std::runtime_error("binary Bellman system is singular (non-proper chain)");
    return TwoByTwo{(b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det};
}

void require_binary(const BanditInstance& inst, const char* op) {
    if (!inst.is_binary())
        throw std::invalid_argument(std::string(op) + ": binary-model instance required");
}

}  // namespace

ValueSolution solve_binary_values(const BanditInstance& instance) {
    require_binary(instance, "solve_binary_values");
    const auto [v0, v1] = solve_policy_system(instance, 0, 0, false);
    const auto& ab = instance.binary_abandonment();
    const int m = instance.num_arms();
    ValueSolution vs;
    vs.v0 = v0;
    vs.v1 = v1;
    vs.q0.resize(m);
    vs.q1.resize(m);
    vs.gap0.resize(m);
    vs.gap1.resize(m);
    for (int a = 0; a < m; ++a) {
        const double mu = instance.arms().mean(a);
        vs.q0[a] = mu + (1.0 - mu) * (1.0 - ab.q00()) * v0 + mu * (1.0 - ab.q01()) * v1;
        vs.q1[a] = mu + (1.0 - mu) * (1.0 - ab.q10()) * v0 + mu * (1.0 - ab.q11()) * v1;
        // gap via the arm-difference identity keeps gap(s, a_1) exactly 0
        const double d = instance.arms().gap(a);
        vs.gap0[a] = d * (1.0 + (1.0 - ab.q01()) * v1 - (1.0 - ab.q00()) * v0);
        vs.gap1[a] = d * (1.0 + (1.0 - ab.q11()) * v1 - (1.0 - ab.q10()) * v0);
    }
    return vs;
}

GapOrientation check_orientation(const BanditInstance& instance, const ValueSolution& vs) {
    require_binary(instance, "check_orientation");
    const auto& ab = instance.binary_abandonment();
    // gap(0,a) - gap(1,a) = (mu_1 - mu_a) [ (q00-q10) V0 - (q01-q11) V1 ];
    // the bracket is arm-independent, so its sign decides the orientation.
    const double d = (ab.q00() - ab.q10()) * vs.v0 - (ab.q01() - ab.q11()) * vs.v1;
    if (d > 0.0) return GapOrientation::Standard;
    if (d < 0.0) return GapOrientation::Opposite;
    return GapOrientation::Degenerate;
}

ConditionVerdict sufficient_condition(const BinaryAbandonment& ab) {
    if (ab.q00() == ab.q10() || ab.q11() >= 1.0) return ConditionVerdict::NotApplicable;
    const double lhs = (ab.q01() - ab.q11()) / (ab.q00() - ab.q10());
    const double rhs =
        std::min((1.0 - ab.q01()) / (1.0 - ab.q11()), (1.0 - ab.q00()) / (1.0 - ab.q10()));
    return lhs <= rhs ? ConditionVerdict::Holds : ConditionVerdict::Fails;
}

BoundConstants bound_constants(const BanditInstance& instance) {
    require_binary(instance, "bound_constants");
    if (instance.arms().degenerate())
        throw std::invalid_argument("bound_constants: mu(a_1) > mu(a_2) required");
    const ValueSolution vs = solve_binary_values(instance);
    const GapOrientation orient = check_orientation(instance, vs);

    BoundConstants bc;
    bc.orientation = orient;
    bc.degenerate_orientation = orient == GapOrientation::Degenerate;
    // Exploration happens in the small-gap state; the ULCB/KL-ULCB bounds use
    // that state's gap while the state-blind UCB references pay the large one.
    const bool opposite = orient == GapOrientation::Opposite;
    const double mu1 = instance.arms().mean(0);
    for (int a = 1; a < instance.num_arms(); ++a) {
        const double delta = instance.arms().gap(a);
        const double gap_small = opposite ? vs.gap0[a] : vs.gap1[a];
        const double gap_large = opposite ? vs.gap1[a] : vs.gap0[a];
        const double kl = bernoulli_kl(instance.arms().mean(a), mu1);
        bc.ulcb_ub += gap_small / (2.0 * delta * delta);
        bc.klulcb_ub += gap_small / kl;
        bc.ucb_ref += gap_large / (2.0 * delta * delta);
        bc.klucb_ref += gap_large / kl;
    }
    bc.lower_bound = bc.klulcb_ub;
    return bc;
}

bool verify_optimal_policy(const BanditInstance& instance) {
    require_binary(instance, "verify_optimal_policy");
    const int m = instance.num_arms();
    if (m > 8) throw std::invalid_argument("verify_optimal_policy: enumeration limited to M <= 8");
    double best0 = -1.0, best1 = -1.0;
    for (int a0 = 0; a0 < m; ++a0) {
        for (int a1 = 0; a1 < m; ++a1) {
            const auto [v0, v1] = solve_policy_system(instance, a0, a1, false);
            if (v0 > best0) best0 = v0;
            if (v1 > best1) best1 = v1;
        }
    }
    const auto [g0, g1] = solve_policy_system(instance, 0, 0, false);
    return g0 >= best0 - 1e-10 && g1 >= best1 - 1e-10;
}

EpisodeLengths expected_episode_length(const BanditInstance& instance) {
    require_binary(instance, "expected_episode_length");
    const auto [l0, l1] = solve_policy_system(instance, 0, 0, true);
    return EpisodeLengths{l0, l1};
}

GeneralValueSolution::GeneralValueSolution(std::vector<double> grid_values,
                                           GeneralAbandonment abandonment,
                                           std::vector<double> means, double residual,
                                           long iterations, bool converged)
    : values_(std::move(grid_values)),
      abandonment_(std::move(abandonment)),
      means_(std::move(means)),
      residual_(residual),
      iterations_(iterations),
      converged_(converged) {}

double GeneralValueSolution::interp(double s) const {
    const int n = grid_size();
    if (s <= 0.0) return values_.front();
    if (s >= 1.0) return values_.back();
    const double x = s * (n - 1);
    const int i = static_cast<int>(x);
    const double w = x - i;
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

double GeneralValueSolution::q_at(double s, int arm) const {
    const double mu = means_[arm];
    const double theta = abandonment_.theta();
    const double lo = (1.0 - theta) * s;
    const double hi = lo + theta;
    return mu + (1.0 - mu) * (1.0 - abandonment_.q(lo)) * interp(lo) +
           mu * (1.0 - abandonment_.q(hi)) * interp(hi);
}

double GeneralValueSolution::gap_at(double s, int arm) const {
    if (arm == 0) return 0.0;
    const double theta = abandonment_.theta();
    const double lo = (1.0 - theta) * s;
    const double hi = lo + theta;
    const double bracket =
        1.0 + (1.0 - abandonment_.q(hi)) * interp(hi) - (1.0 - abandonment_.q(lo)) * interp(lo);
    return (means_[0] - means_[arm]) * bracket;
}

GeneralValueSolution solve_general_values(const BanditInstance& instance, int grid_size,
                                          double tol, long max_iterations) {
    if (instance.is_binary())
        throw std::invalid_argument("solve_general_values: general-model instance required");
    if (grid_size < 64) throw std::invalid_argument("solve_general_values: grid_size >= 64");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_general_values: tol must be positive");

    const auto& ab = instance.general_abandonment();
    const double theta = ab.theta();
    const double mu1 = instance.arms().mean(0);
    const int n = grid_size;

    // Successor states, survival factors and interpolation stencils are fixed
    // per grid point; precompute them once.
    std::vector<int> lo_idx(n), hi_idx(n);
    std::vector<double> lo_w(n), hi_w(n), lo_f(n), hi_f(n);
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        const double lo = (1.0 - theta) * s;
        const double hi = lo + theta;
        auto stencil = [n](double x, int& idx, double& w) {
            double t = x * (n - 1);
            if (t >= n - 1) t = n - 1;
            idx = static_cast<int>(t);
            if (idx >= n - 1) idx = n - 2;
            w = t - idx;
        };
        stencil(lo, lo_idx[i], lo_w[i]);
        stencil(hi, hi_idx[i], hi_w[i]);
        lo_f[i] = (1.0 - mu1) * (1.0 - ab.q(lo));
        hi_f[i] = mu1 * (1.0 - ab.q(hi));
    }

    std::vector<double> v(n, 0.0), next(n, 0.0);
    double residual = 0.0;
    long it = 0;
    bool converged = false;
    for (; it < max_iterations; ++it) {
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double vlo = v[lo_idx[i]] + lo_w[i] * (v[lo_idx[i] + 1] - v[lo_idx[i]]);
            const double vhi = v[hi_idx[i]] + hi_w[i] * (v[hi_idx[i] + 1] - v[hi_idx[i]]);
            next[i] = mu1 + lo_f[i] * vlo + hi_f[i] * vhi;
            const double d = std::abs(next[i] - v[i]);
            if (d > residual) residual = d;
        }
        v.swap(next);
        if (residual < tol) {
            converged = true;
            ++it;
            break;
        }
    }
    return GeneralValueSolution(std::move(v), ab, instance.arms().means(), residual, it,
                                converged);
}

bool check_gap_monotonicity(const BanditInstance& instance, const GeneralValueSolution& vs) {
    const int n = vs.grid_size();
    for (int a = 1; a < instance.num_arms(); ++a) {
        double prev = vs.gap_at(0.0, a);
        for (int i = 1; i < n; ++i) {
            const double g = vs.gap_at(static_cast<double>(i) / (n - 1), a);
            if (g > prev + 1e-10) return false;
            prev = g;
        }
    }
    return true;
}

GeneralBoundConstants general_bound_constants(const BanditInstance& instance,
                                              const GeneralValueSolution& vs, int n_bins) {
    if (n_bins < 2) throw std::invalid_argument("general_bound_constants: n_bins >= 2");
    if (instance.arms().degenerate())
        throw std::invalid_argument("general_bound_constants: mu(a_1) > mu(a_2) required");
    GeneralBoundConstants gb;
    gb.n_bins = n_bins;
    const double s_bin = static_cast<double>(n_bins - 1) / n_bins;
    const double mu1 = instance.arms().mean(0);
    for (int a = 1; a < instance.num_arms(); ++a) {
        const double delta = instance.arms().gap(a);
        const double kl = bernoulli_kl(instance.arms().mean(a), mu1);
        gb.disc_ulcb_ub += vs.gap_at(s_bin, a) / (2.0 * delta * delta);
        gb.disc_klulcb_ub += vs.gap_at(s_bin, a) / kl;
        gb.lower_bound += vs.gap_at(1.0, a) / kl;
    }
    return gb;
}

}  // namespace maba
