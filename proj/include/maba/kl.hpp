#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace maba {

// Bisection domain for the confidence-bound inversions is clamped away from
// {0,1} where the divergence blows up.
inline constexpr double kKlDomainEps = 1e-12;

// KL divergence between Bernoulli(p) and Bernoulli(q), in nats.
// Conventions: 0*log 0 = 0; returns +inf when q in {0,1} and p != q.
inline double bernoulli_kl(double p, double q) {
    if (q <= 0.0) return p == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (q >= 1.0) return p == 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
    double v = 0.0;
    if (p > 0.0) v += p * std::log(p / q);
    if (p < 1.0) v += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return v;
}

// d/dq bernoulli_kl(p, q) = (q - p) / (q (1 - q)).
inline double bernoulli_kl_slope(double p, double q) {
    return (q - p) / (q * (1.0 - q));
}

namespace detail {

// Feasibility predicate shared by both inversions: kl(mu, p) * n <= threshold.
// Bisection keeps `feas` on the feasible side and stops when the bracket
// collapses to machine resolution or the budget is met to 1e-8, so the
// returned point satisfies the inequality and sits within 1e-9 of the
// boundary in p for interior solutions.
inline double kl_bisect(double mu, std::int64_t n, double threshold, double feas,
                        double infeas) {
    const double nn = static_cast<double>(n);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (feas + infeas);
        if (mid == feas || mid == infeas) break;
        if (bernoulli_kl(mu, mid) * nn <= threshold)
            feas = mid;
        else
            infeas = mid;
        if (std::abs(infeas - feas) < 1e-9 &&
            threshold - bernoulli_kl(mu, feas) * nn <= 1e-8)
            break;
    }
    return feas;
}

}  // namespace detail

// Largest p in [mu_bar, 1] with kl(mu_bar, p) * n <= threshold.
inline double kl_index_upper(double mu_bar, std::int64_t n, double threshold) {
    if (threshold < 0.0) threshold = 0.0;
    if (mu_bar >= 1.0) return 1.0;
    const double cap = 1.0 - kKlDomainEps;
    if (mu_bar >= cap) return mu_bar;
    if (bernoulli_kl(mu_bar, cap) * static_cast<double>(n) <= threshold) return cap;
    return detail::kl_bisect(mu_bar, n, threshold, mu_bar, cap);
}

// Smallest p in [0, mu_bar] with kl(mu_bar, p) * n <= threshold.
inline double kl_index_lower(double mu_bar, std::int64_t n, double threshold) {
    if (threshold < 0.0) threshold = 0.0;
    if (mu_bar <= 0.0) return 0.0;
    const double cap = kKlDomainEps;
    if (mu_bar <= cap) return mu_bar;
    if (bernoulli_kl(mu_bar, cap) * static_cast<double>(n) <= threshold) return cap;
    return detail::kl_bisect(mu_bar, n, threshold, mu_bar, cap);
}

}  // namespace maba
