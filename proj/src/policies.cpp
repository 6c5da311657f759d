#include "maba/policies.hpp"

#include <algorithm>

#include "maba/solver.hpp"

namespace maba {

PolicySpec PolicySpec::make(PolicyKind kind, Orientation orientation) {
    PolicySpec spec;
    spec.kind = kind;
    spec.orientation = orientation;
    spec.label = kind_name(kind);
    switch (kind) {
        case PolicyKind::Ulcb:
        case PolicyKind::DiscUlcb:
            spec.c0 = orientation == Orientation::Standard ? -1.0 : 1.0;
            spec.c1 = orientation == Orientation::Standard ? 1.0 : -1.0;
            break;
        case PolicyKind::KlUlcb:
        case PolicyKind::DiscKlUlcb:
        case PolicyKind::ContKlUlcb:
            spec.c0 = 1.0;
            spec.c1 = 1.0;
            break;
        case PolicyKind::Ucb:
        case PolicyKind::KlUcb:
        case PolicyKind::ContUlcb:
            spec.c0 = 1.0;
            spec.c1 = 1.0;
            break;
        case PolicyKind::QEps:
        case PolicyKind::QUcb:
        case PolicyKind::Genie:
            break;
    }
    return spec;
}

void PolicySpec::validate() const {
    if (!(c >= 0.0)) throw std::invalid_argument("policy: c >= 0 required");
    if (kind == PolicyKind::DiscUlcb || kind == PolicyKind::DiscKlUlcb) {
        if (n_bins < 2) throw std::invalid_argument("policy: n_bins >= 2 required");
    }
    if (kind == PolicyKind::QEps) {
        if (!(epsilon >= 0.0) || !(epsilon <= 1.0))
            throw std::invalid_argument("policy: epsilon must lie in [0, 1]");
    }
    if (kind == PolicyKind::QUcb) {
        if (!(bonus_c >= 0.0)) throw std::invalid_argument("policy: bonus_c >= 0 required");
    }
}

const char* kind_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Ulcb: return "ulcb";
        case PolicyKind::KlUlcb: return "kl-ulcb";
        case PolicyKind::Ucb: return "ucb";
        case PolicyKind::KlUcb: return "kl-ucb";
        case PolicyKind::DiscUlcb: return "disc-ulcb";
        case PolicyKind::DiscKlUlcb: return "disc-kl-ulcb";
        case PolicyKind::ContUlcb: return "cont-ulcb";
        case PolicyKind::ContKlUlcb: return "cont-kl-ulcb";
        case PolicyKind::QEps: return "q-eps";
        case PolicyKind::QUcb: return "q-ucb";
        case PolicyKind::Genie: return "genie";
    }
    return "?";
}

PolicyKind parse_kind(const std::string& name) {
    static const std::pair<const char*, PolicyKind> table[] = {
        {"ulcb", PolicyKind::Ulcb},           {"kl-ulcb", PolicyKind::KlUlcb},
        {"ucb", PolicyKind::Ucb},             {"kl-ucb", PolicyKind::KlUcb},
        {"disc-ulcb", PolicyKind::DiscUlcb},  {"disc-kl-ulcb", PolicyKind::DiscKlUlcb},
        {"cont-ulcb", PolicyKind::ContUlcb},  {"cont-kl-ulcb", PolicyKind::ContKlUlcb},
        {"q-eps", PolicyKind::QEps},          {"q-ucb", PolicyKind::QUcb},
        {"genie", PolicyKind::Genie},
    };
    for (const auto& [n, k] : table)
        if (name == n) return k;
    throw std::invalid_argument("unknown policy kind: " + name);
}

const char* orientation_name(Orientation o) {
    return o == Orientation::Standard ? "standard" : "opposite";
}

Policy::Policy(const PolicySpec& spec, const BanditInstance& instance)
    : spec_(spec), qtable_(instance.num_arms()) {
    spec_.validate();
    const int m = instance.num_arms();
    upper_cache_.resize(m);
    lower_cache_.resize(m);
    brackets_.resize(m);
    mu_space_.resize(m);
    candidate_.resize(m);
    if (spec_.kind == PolicyKind::QEps || spec_.kind == PolicyKind::QUcb) {
        if (!instance.is_binary())
            throw std::invalid_argument("Q-learning baselines require the binary model");
        if (spec_.kind == PolicyKind::QUcb)
            qucb_h_ = spec_.h > 0.0 ? spec_.h : expected_episode_length(instance).max();
    }
}

// Brackets live in "upper space": the lower index of mean mu is the
// reflection 1 - upper index of mean 1 - mu, since kl(p,q) = kl(1-p, 1-q).
// `lo` is the feasible endpoint: kl(mu, lo) <= budget.
//
// Free-of-transcendentals initial bounds: the larger root of the chi-square
// majorant (q - mu)^2 = b q (1 - q) is feasible because kl <= chi2; Pinsker
// caps the index from above.
Policy::KlBracket Policy::initial_bracket(double mu, double b, double cap) {
    if (mu >= cap) {
        const double pinned = mu >= 1.0 ? 1.0 : mu;
        return {pinned, pinned, 0.0};
    }
    const double root = std::sqrt(b * (4.0 * mu * (1.0 - mu) + b));
    double lo = (2.0 * mu + b + root) / (2.0 * (1.0 + b));
    double hi = mu + std::sqrt(0.5 * b);
    if (lo > cap) lo = cap;
    if (hi > cap) hi = cap;
    if (hi < lo) hi = lo;
    return {lo, hi, -1.0};
}

// One tangent/chord round. The tangent at the feasible endpoint overestimates
// the root (kl is convex in its second argument), the chord between the two
// endpoints underestimates it; both stay valid brackets, and the feasible
// endpoint's kl value is kept known so the bracket can be cached. Costs at
// most three kl evaluations. Returns true when the bracket is pinned.
bool Policy::refine_bracket(double mu, double b, double cap, KlBracket& br) {
    if (!(br.hi - br.lo > 1e-12)) return true;
    if (br.kl_lo < 0.0) br.kl_lo = bernoulli_kl(mu, br.lo);
    const double slope = bernoulli_kl_slope(mu, br.lo);
    double hi_new = br.hi;
    if (slope > 0.0) {
        const double tangent = br.lo + (b - br.kl_lo) / slope;
        if (tangent < hi_new) hi_new = tangent;
    }
    if (hi_new > cap) hi_new = cap;
    if (hi_new <= br.lo) {
        br.hi = br.lo;
        return true;
    }
    const double khi = bernoulli_kl(mu, hi_new);
    if (khi <= b) {  // the upper estimate is itself feasible: pinned
        br.lo = br.hi = hi_new;
        br.kl_lo = khi;
        return true;
    }
    if (khi > br.kl_lo) {
        const double chord = br.lo + (hi_new - br.lo) * (b - br.kl_lo) / (khi - br.kl_lo);
        if (chord > br.lo && chord < hi_new) {
            const double kchord = bernoulli_kl(mu, chord);
            if (kchord <= b) {
                br.lo = chord;
                br.kl_lo = kchord;
            }
        }
    }
    br.hi = hi_new;
    return false;
}

double Policy::kl_refresh(const AgentState& agent, int arm, double thr, bool upper) {
    const std::int64_t n = agent.counts[arm];
    const double mu = agent.mean(arm);
    const double p = upper ? kl_index_upper(mu, n, thr) : kl_index_lower(mu, n, thr);
    KlCache& cache = upper ? upper_cache_[arm] : lower_cache_[arm];
    cache.n = n;
    cache.sum = agent.reward_sums[arm];
    cache.p = p;
    cache.kl_at_p = bernoulli_kl(mu, p);
    cache.slope = p > 0.0 && p < 1.0 ? std::abs(bernoulli_kl_slope(mu, p)) : 0.0;
    return p;
}

int Policy::argmax_kl(const AgentState& agent, double thr, bool upper) {
    if (thr < 0.0) thr = 0.0;
    const int m = agent.num_arms();
    // per-arm brackets in upper space; value space is the reflection for the
    // lower side
    for (int a = 0; a < m; ++a) {
        const std::int64_t n = agent.counts[a];
        const double budget = thr / static_cast<double>(n);
        const double mu_true = agent.mean(a);
        const double mu = upper ? mu_true : 1.0 - mu_true;
        const double cap = mu >= 1.0 ? 1.0 : 1.0 - kKlDomainEps;
        KlBracket br = initial_bracket(mu, budget, cap);
        const KlCache& cache = upper ? upper_cache_[a] : lower_cache_[a];
        if (cache.n == n && cache.sum == agent.reward_sums[a] && cache.kl_at_p <= budget) {
            // a known feasible point bounds the index from the feasible side,
            // and its tangent limits how far beyond it the index can sit
            const double cached = upper ? cache.p : 1.0 - cache.p;
            if (cached > br.lo) {
                br.lo = cached;
                br.kl_lo = cache.kl_at_p;
            }
            if (cache.slope > 0.0) {
                const double reach = cached + (budget - cache.kl_at_p) / cache.slope;
                if (reach < br.hi) br.hi = reach;
            }
            if (br.hi < br.lo) br.hi = br.lo;
        }
        brackets_[a] = br;
        mu_space_[a] = mu;
    }

    // progressively tighten only the arms still in contention
    int selected = -1;
    for (int round = 0; round <= 3 && selected < 0; ++round) {
        double max_vlb = -1.0;
        for (int a = 0; a < m; ++a) {
            const double vlb = upper ? brackets_[a].lo : 1.0 - brackets_[a].hi;
            if (vlb > max_vlb) max_vlb = vlb;
        }
        int candidate = -1;
        int n_candidates = 0;
        for (int a = 0; a < m; ++a) {
            const double vub = upper ? brackets_[a].hi : 1.0 - brackets_[a].lo;
            candidate_[a] = vub >= max_vlb;
            if (candidate_[a]) {
                ++n_candidates;
                if (candidate < 0) candidate = a;
            }
        }
        if (n_candidates == 1) {
            selected = candidate;
            break;
        }
        if (round == 3) break;
        bool any_refined = false;
        for (int a = 0; a < m; ++a) {
            if (!candidate_[a] || brackets_[a].hi - brackets_[a].lo <= 1e-10) continue;
            refine_bracket(mu_space_[a], thr / static_cast<double>(agent.counts[a]),
                           mu_space_[a] >= 1.0 ? 1.0 : 1.0 - kKlDomainEps, brackets_[a]);
            any_refined = true;
        }
        if (!any_refined) break;  // photo-finish between tight brackets
    }

    // keep the evaluated feasible points so later steps start from tight
    // brackets instead of re-deriving them
    for (int a = 0; a < m; ++a) {
        if (brackets_[a].kl_lo < 0.0) continue;
        KlCache& cache = upper ? upper_cache_[a] : lower_cache_[a];
        cache.n = agent.counts[a];
        cache.sum = agent.reward_sums[a];
        cache.p = upper ? brackets_[a].lo : 1.0 - brackets_[a].lo;
        cache.kl_at_p = brackets_[a].kl_lo;
        cache.slope = brackets_[a].lo > 0.0 && brackets_[a].lo < 1.0
                          ? std::abs(bernoulli_kl_slope(mu_space_[a], brackets_[a].lo))
                          : 0.0;
    }
    if (selected >= 0) return selected;

    // brackets could not separate the leaders: settle them exactly
    int best = -1;
    double best_v = -1.0;
    for (int a = 0; a < m; ++a) {
        if (!candidate_[a]) continue;
        const double v = kl_refresh(agent, a, thr, upper);
        if (v > best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

}  // namespace maba
