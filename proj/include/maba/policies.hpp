#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "maba/kl.hpp"
#include "maba/model.hpp"
#include "maba/rng.hpp"

namespace maba {

// Sufficient statistic of every index policy: pull counts and reward sums per
// arm plus the global step counter (t = 1 + sum of counts). Means are exposed
// as sum/count so mean * count recovers the integer reward sum exactly.
struct AgentState {
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> reward_sums;
    std::int64_t t = 1;

    explicit AgentState(int arms) : counts(arms, 0), reward_sums(arms, 0) {}

    int num_arms() const { return static_cast<int>(counts.size()); }

    double mean(int arm) const {
        return static_cast<double>(reward_sums[arm]) / static_cast<double>(counts[arm]);
    }

    void update(int arm, int reward) {
        ++counts[arm];
        reward_sums[arm] += reward;
        ++t;
    }

    int first_unpulled() const {
        for (int a = 0; a < num_arms(); ++a)
            if (counts[a] == 0) return a;
        return -1;
    }
};

enum class PolicyKind {
    Ulcb,
    KlUlcb,
    Ucb,
    KlUcb,
    DiscUlcb,
    DiscKlUlcb,
    ContUlcb,
    ContKlUlcb,
    QEps,
    QUcb,
    Genie,  // model-based optimal play (always a_1); baseline for validation
};

enum class Orientation { Standard, Opposite };

struct PolicySpec {
    PolicyKind kind = PolicyKind::Ulcb;
    std::string label;
    Orientation orientation = Orientation::Standard;
    double c0 = -1.0;
    double c1 = 1.0;
    double c = 0.0;  // log log coefficient; 0 drops the term entirely
    int n_bins = 4;
    double epsilon = 0.1;   // Q-EPS
    double h = 0.0;         // Q-UCB horizon; <= 0 derives it from the model
    double bonus_c = 4.0;   // Q-UCB bonus coefficient

    static PolicySpec make(PolicyKind kind, Orientation orientation = Orientation::Standard);
    void validate() const;
};

const char* kind_name(PolicyKind kind);
PolicyKind parse_kind(const std::string& name);
const char* orientation_name(Orientation o);

// coeff * log t + c * log(log t); the log log term is dropped when c = 0 and
// treated as 0 where it is undefined (t = 1).
inline double exploration_threshold(std::int64_t t, double coeff, double c) {
    const double lt = std::log(static_cast<double>(t));
    double v = coeff * lt;
    if (c != 0.0 && t >= 2) v += c * std::log(lt);
    return v;
}

// mu_bar(a) + coeff * sqrt((log t + c log log t) / (2 N(a))).
inline double ulcb_index(const AgentState& agent, int arm, double coeff, double c) {
    if (agent.counts[arm] < 1) throw std::invalid_argument("ulcb_index: unpulled arm");
    double rad = exploration_threshold(agent.t, 1.0, c);
    if (rad < 0.0) rad = 0.0;
    return agent.mean(arm) + coeff * std::sqrt(rad / (2.0 * static_cast<double>(agent.counts[arm])));
}

// 1 iff s lies in the top bin [(n-1)/n, 1].
inline int disc_state_map(double s, int n) {
    if (n < 2) throw std::invalid_argument("disc_state_map: n >= 2 required");
    return s >= static_cast<double>(n - 1) / static_cast<double>(n) ? 1 : 0;
}

// Tabular Q estimates over states {0, 1}; Q(g, .) = 0 is implicit.
class QTable {
public:
    explicit QTable(int arms) : arms_(arms), q_(2 * arms, 0.0), visits_(2 * arms, 0) {}

    int num_arms() const { return arms_; }
    double q(int state, int arm) const { return q_[state * arms_ + arm]; }
    double& q(int state, int arm) { return q_[state * arms_ + arm]; }
    std::int64_t visits(int state, int arm) const { return visits_[state * arms_ + arm]; }
    std::int64_t& visits(int state, int arm) { return visits_[state * arms_ + arm]; }

    double max_q(int state) const {
        double best = q(state, 0);
        for (int a = 1; a < arms_; ++a)
            if (q(state, a) > best) best = q(state, a);
        return best;
    }

    int greedy(int state) const {
        int best = 0;
        for (int a = 1; a < arms_; ++a)
            if (q(state, a) > q(state, best)) best = a;
        return best;
    }

private:
    int arms_;
    std::vector<double> q_;
    std::vector<std::int64_t> visits_;
};

// Action-selection engine for one replication. Owns the mutable per-policy
// state (KL index caches, Q table); the AgentState is owned by the caller.
//
// KL indices are evaluated lazily: each arm keeps cheap bracketing bounds
// (chi-square lower / Pinsker upper, tightened by a tangent bound around the
// last exact inversion, valid by convexity of kl in its second argument), and
// the bisection runs only for arms whose brackets still overlap the leader.
class Policy {
public:
    Policy(const PolicySpec& spec, const BanditInstance& instance);

    const PolicySpec& spec() const { return spec_; }
    const QTable& qtable() const { return qtable_; }

    int select(double state, const AgentState& agent, Rng& rng) {
        if (spec_.kind == PolicyKind::Genie) return 0;  // no exploration at all
        if (const int u = agent.first_unpulled(); u >= 0) return u;  // play each arm once
        switch (spec_.kind) {
            case PolicyKind::Genie:
                return 0;
            case PolicyKind::Ucb:
                return argmax_sqrt(agent, spec_.c1);
            case PolicyKind::Ulcb: {
                const int s = state > 0.5 ? 1 : 0;
                return argmax_sqrt(agent, s ? spec_.c1 : spec_.c0);
            }
            case PolicyKind::DiscUlcb: {
                const int s = disc_state_map(state, spec_.n_bins);
                return argmax_sqrt(agent, s ? spec_.c1 : spec_.c0);
            }
            case PolicyKind::ContUlcb:
                return argmax_sqrt(agent, 2.0 * state - 1.0);
            case PolicyKind::KlUcb:
                return argmax_kl(agent, exploration_threshold(agent.t, spec_.c1, spec_.c),
                                 /*upper=*/true);
            case PolicyKind::KlUlcb: {
                const int s = state > 0.5 ? 1 : 0;
                return select_kl_binary(agent, s);
            }
            case PolicyKind::DiscKlUlcb: {
                const int s = disc_state_map(state, spec_.n_bins);
                return select_kl_binary(agent, s);
            }
            case PolicyKind::ContKlUlcb: {
                if (state <= 0.5)
                    return argmax_kl(agent,
                                     exploration_threshold(agent.t, 1.0 - 2.0 * state, spec_.c),
                                     /*upper=*/false);
                return argmax_kl(agent,
                                 exploration_threshold(agent.t, 2.0 * state - 1.0, spec_.c),
                                 /*upper=*/true);
            }
            case PolicyKind::QEps: {
                if (spec_.epsilon > 0.0 && rng.uniform01() < spec_.epsilon) {
                    const int m = agent.num_arms();
                    int a = static_cast<int>(rng.uniform01() * m);
                    return a >= m ? m - 1 : a;
                }
                return qtable_.greedy(state > 0.5 ? 1 : 0);
            }
            case PolicyKind::QUcb:
                return select_qucb(state > 0.5 ? 1 : 0, agent);
        }
        throw std::logic_error("select: unhandled policy kind");
    }

    // Feeds the observed transition back. Index policies need nothing here
    // (their caches key on the pull counts); Q policies update their table.
    void observe(double state, int arm, int reward, bool abandoned, double next_state) {
        if (spec_.kind != PolicyKind::QEps && spec_.kind != PolicyKind::QUcb) return;
        const int s = state > 0.5 ? 1 : 0;
        const std::int64_t n = ++qtable_.visits(s, arm);
        const double alpha = spec_.kind == PolicyKind::QEps
                                 ? 1.0 / static_cast<double>(n)
                                 : (qucb_h_ + 1.0) / (qucb_h_ + static_cast<double>(n));
        const double target =
            reward + (abandoned ? 0.0 : qtable_.max_q(next_state > 0.5 ? 1 : 0));
        double& q = qtable_.q(s, arm);
        q += alpha * (target - q);
    }

private:
    // A feasible point of the index problem for one (arm, side): a p with
    // kl(mu, p) = kl_at_p on the index's side of mu. Bounds the index from
    // the feasible side; together with the tangent slope it also bounds how
    // far the index can sit beyond p at any larger threshold.
    struct KlCache {
        std::int64_t n = -1;
        std::int64_t sum = -1;
        double p = 0.0;
        double kl_at_p = 0.0;
        double slope = 0.0;  // |d/dp kl(mu, p)|
    };

    struct KlBracket {
        double lo = 0.0, hi = 0.0;
        double kl_lo = -1.0;  // kl at lo; negative when unknown
    };

    int select_kl_binary(const AgentState& agent, int s) {
        const double coeff = s ? spec_.c1 : spec_.c0;
        const double thr = exploration_threshold(agent.t, coeff, spec_.c);
        const bool upper = (spec_.orientation == Orientation::Standard) ? s == 1 : s == 0;
        return argmax_kl(agent, thr, upper);
    }

    int argmax_sqrt(const AgentState& agent, double coeff) {
        double rad = exploration_threshold(agent.t, 1.0, spec_.c);
        if (rad < 0.0) rad = 0.0;
        int best = 0;
        double best_v = agent.mean(0) + coeff * std::sqrt(rad / (2.0 * agent.counts[0]));
        for (int a = 1; a < agent.num_arms(); ++a) {
            const double v = agent.mean(a) + coeff * std::sqrt(rad / (2.0 * agent.counts[a]));
            if (v > best_v) {
                best_v = v;
                best = a;
            }
        }
        return best;
    }

    static KlBracket initial_bracket(double mu, double b, double cap);
    static bool refine_bracket(double mu, double b, double cap, KlBracket& br);
    int argmax_kl(const AgentState& agent, double thr, bool upper);
    double kl_refresh(const AgentState& agent, int arm, double thr, bool upper);

    int select_qucb(int s, const AgentState& agent) {
        for (int a = 0; a < agent.num_arms(); ++a)
            if (qtable_.visits(s, a) == 0) return a;
        const double logt = std::log(static_cast<double>(agent.t));
        int best = 0;
        double best_v = -1e300;
        for (int a = 0; a < agent.num_arms(); ++a) {
            const double v = qtable_.q(s, a) +
                             spec_.bonus_c * std::sqrt(qucb_h_ * logt / qtable_.visits(s, a));
            if (v > best_v) {
                best_v = v;
                best = a;
            }
        }
        return best;
    }

    PolicySpec spec_;
    double qucb_h_ = 0.0;
    QTable qtable_;
    std::vector<KlCache> upper_cache_, lower_cache_;
    // selection scratch
    std::vector<KlBracket> brackets_;
    std::vector<double> mu_space_;
    std::vector<char> candidate_;
};

}  // namespace maba
