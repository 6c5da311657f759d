#include "maba/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace maba {

ArmSet::ArmSet(std::vector<double> means_user_order) : user_(std::move(means_user_order)) {
    if (user_.size() < 2) throw std::invalid_argument("ArmSet: at least 2 arms required");
    for (double m : user_) {
        if (!(m >= 0.0) || !(m < 1.0))
            throw std::invalid_argument("ArmSet: every mean must lie in [0, 1) (mu(a_1) < 1)");
    }
    perm_.resize(user_.size());
    std::iota(perm_.begin(), perm_.end(), 0);
    std::stable_sort(perm_.begin(), perm_.end(),
                     [&](int a, int b) { return user_[a] > user_[b]; });
    sorted_.reserve(user_.size());
    for (int p : perm_) sorted_.push_back(user_[p]);
}

BinaryAbandonment::BinaryAbandonment(double q00, double q01, double q10, double q11) {
    const double qs[4] = {q00, q01, q10, q11};
    for (double q : qs) {
        if (!(q >= 0.0) || !(q <= 1.0))
            throw std::invalid_argument("BinaryAbandonment: probabilities must lie in [0, 1]");
    }
    if (!(q00 > 0.0))
        throw std::invalid_argument("BinaryAbandonment: q(0,0) > 0 is required");
    // q(i,j) >= q(i',j') whenever i+j < i'+j'
    if (q00 < q01 || q00 < q10 || q01 < q11 || q10 < q11)
        throw std::invalid_argument(
            "BinaryAbandonment: monotonicity q(i,j) >= q(i',j') for i+j < i'+j' violated");
    q_[0][0] = q00;
    q_[0][1] = q01;
    q_[1][0] = q10;
    q_[1][1] = q11;
}

GeneralAbandonment GeneralAbandonment::log_family(double c6, double theta) {
    if (!(c6 > 0.0)) throw std::invalid_argument("GeneralAbandonment: c6 must be positive");
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("GeneralAbandonment: theta must lie in (0, 1)");
    GeneralAbandonment g;
    g.theta_ = theta;
    g.log_c6_ = c6;
    g.log_norm_ = std::log1p(c6);
    return g;
}

GeneralAbandonment GeneralAbandonment::table(std::vector<std::pair<double, double>> points,
                                             double theta) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("GeneralAbandonment: theta must lie in (0, 1)");
    if (points.size() < 2)
        throw std::invalid_argument("GeneralAbandonment: table needs at least 2 points");
    std::sort(points.begin(), points.end());
    if (points.front().first != 0.0 || points.back().first != 1.0)
        throw std::invalid_argument("GeneralAbandonment: table must cover s = 0 and s = 1");
    double prev_s = -1.0, prev_q = 2.0;
    for (const auto& [s, q] : points) {
        if (!(q >= 0.0) || !(q <= 1.0))
            throw std::invalid_argument("GeneralAbandonment: q values must lie in [0, 1]");
        if (s == prev_s)
            throw std::invalid_argument("GeneralAbandonment: duplicate table abscissa");
        if (q > prev_q)
            throw std::invalid_argument("GeneralAbandonment: q(s) must be non-increasing in s");
        if (s < 1.0 && !(q > 0.0))
            throw std::invalid_argument("GeneralAbandonment: q(s) must be positive for s < 1");
        prev_s = s;
        prev_q = q;
    }
    GeneralAbandonment g;
    g.theta_ = theta;
    g.points_ = std::move(points);
    return g;
}

double GeneralAbandonment::q(double s) const {
    if (s <= 0.0) s = 0.0;
    if (s >= 1.0) s = 1.0;
    if (log_c6_ > 0.0) {
        const double v = 1.0 - std::log1p(log_c6_ * s) / log_norm_;
        return v < 0.0 ? 0.0 : v;
    }
    const auto it = std::lower_bound(points_.begin(), points_.end(), s,
                                     [](const auto& p, double x) { return p.first < x; });
    if (it == points_.begin()) return it->second;
    const auto& [s1, q1] = *std::prev(it);
    const auto& [s2, q2] = *it;
    if (s2 == s1) return q2;
    const double w = (s - s1) / (s2 - s1);
    return q1 + w * (q2 - q1);
}

namespace {

InitialState validate_initial(const InitialState& init, bool binary) {
    if (init.support.empty())
        throw std::invalid_argument("BanditInstance: empty initial-state distribution");
    double total = 0.0;
    for (const auto& [value, prob] : init.support) {
        if (!(prob >= 0.0)) throw std::invalid_argument("BanditInstance: negative probability");
        total += prob;
        if (binary) {
            if (value != 0.0 && value != 1.0)
                throw std::invalid_argument(
                    "BanditInstance: binary initial state must be 0 or 1");
        } else if (!(value >= 0.0) || !(value <= 1.0)) {
            throw std::invalid_argument("BanditInstance: initial state must lie in [0, 1]");
        }
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("BanditInstance: initial-state probabilities must sum to 1");
    return init;
}

}  // namespace

BanditInstance::BanditInstance(ArmSet arms, Abandonment abandonment)
    : BanditInstance(std::move(arms), std::move(abandonment), InitialState::point_mass(1.0)) {}

BanditInstance::BanditInstance(ArmSet arms, Abandonment abandonment, InitialState initial)
    : arms_(std::move(arms)),
      abandonment_(std::move(abandonment)),
      initial_(validate_initial(initial, std::holds_alternative<BinaryAbandonment>(abandonment_))) {}

void throw_bad_arm() { throw std::invalid_argument("arm index out of range"); }
void throw_bad_state() { throw std::invalid_argument("state outside the model's state space"); }

TransitionRow BanditInstance::transition_probs(double state, int arm) const {
    if (arm < 0 || arm >= num_arms())
        throw std::invalid_argument("transition_probs: arm index out of range");
    const double mu = arms_.mean(arm);
    if (is_binary()) {
        if (state != 0.0 && state != 1.0)
            throw std::invalid_argument("transition_probs: binary state must be 0 or 1");
        const auto& ab = binary_abandonment();
        const int s = state > 0.5 ? 1 : 0;
        const double p_low = (1.0 - mu) * (1.0 - ab.q(s, 0));
        const double p_high = mu * (1.0 - ab.q(s, 1));
        return TransitionRow{0.0, 1.0, p_low, p_high, 1.0 - p_low - p_high};
    }
    if (!(state >= 0.0) || !(state <= 1.0))
        throw std::invalid_argument("transition_probs: state must lie in [0, 1]");
    const auto& ab = general_abandonment();
    const double low = (1.0 - ab.theta()) * state;
    const double high = low + ab.theta();
    const double p_low = (1.0 - mu) * (1.0 - ab.q(low));
    const double p_high = mu * (1.0 - ab.q(high));
    return TransitionRow{low, high, p_low, p_high, 1.0 - p_low - p_high};
}

}  // namespace maba
