#include "maba/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace maba {

namespace {

constexpr double kZ95 = 1.959963984540054;
// Replications are aggregated in fixed blocks and the blocks merged in index
// order, so floating-point reduction order never depends on the worker count.
constexpr std::int64_t kBlockSize = 16;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

struct EpisodeResult {
    double reward_sum = 0.0;
    bool truncated = false;
    std::int64_t steps = 0;
};

// One episode played by the learner. Gap increments are accumulated into
// `regret` when a decomposition oracle is present.
template <bool Binary>
EpisodeResult play_episode(const BanditInstance& inst, Policy& policy, AgentState& agent,
                           double s0, std::int64_t cap, const GapOracle* oracle, Rng& rng,
                           double& regret) {
    const double* mu = inst.arms().means().data();
    EpisodeResult out;
    double s = s0;
    for (;;) {
        if (out.steps >= cap) {
            out.truncated = true;
            break;
        }
        const int arm = policy.select(s, agent, rng);
        const int reward = rng.uniform01() < mu[arm] ? 1 : 0;
        out.reward_sum += reward;
        bool abandon;
        double next;
        if constexpr (Binary) {
            abandon = detail::sample_abandon(
                inst.binary_abandonment().q(s > 0.5 ? 1 : 0, reward), rng);
            next = reward;
        } else {
            const auto& ab = inst.general_abandonment();
            next = (1.0 - ab.theta()) * s + ab.theta() * reward;
            abandon = detail::sample_abandon(ab.q(next), rng);
        }
        if (oracle && arm != 0) regret += oracle->gap(s, arm);
        policy.observe(s, arm, reward, abandon, next);
        agent.update(arm, reward);
        ++out.steps;
        if (abandon) break;
        s = next;
    }
    return out;
}

// Genie episode: always pull a_1, no learning state.
template <bool Binary>
double play_genie_episode(const BanditInstance& inst, double s0, std::int64_t cap, Rng& rng) {
    const double mu1 = inst.arms().mean(0);
    double total = 0.0;
    double s = s0;
    for (std::int64_t steps = 0; steps < cap; ++steps) {
        const int reward = rng.uniform01() < mu1 ? 1 : 0;
        total += reward;
        bool abandon;
        double next;
        if constexpr (Binary) {
            abandon = detail::sample_abandon(
                inst.binary_abandonment().q(s > 0.5 ? 1 : 0, reward), rng);
            next = reward;
        } else {
            const auto& ab = inst.general_abandonment();
            next = (1.0 - ab.theta()) * s + ab.theta() * reward;
            abandon = detail::sample_abandon(ab.q(next), rng);
        }
        if (abandon) break;
        s = next;
    }
    return total;
}

template <bool Binary>
std::vector<double> run_trial_impl(const SimConfig& cfg, const GapOracle* oracle,
                                   std::uint64_t replication, TrialStats* stats) {
    Rng rng = Rng::stream(cfg.master_seed, replication, 0);
    Rng genie_rng = Rng::stream(cfg.master_seed, replication, 1);
    AgentState agent(cfg.instance.num_arms());
    Policy policy(cfg.policy, cfg.instance);
    const bool direct = cfg.estimator == Estimator::Direct;

    std::vector<double> cum(static_cast<std::size_t>(cfg.episodes));
    double regret = 0.0;
    TrialStats local;
    for (std::int64_t k = 0; k < cfg.episodes; ++k) {
        const double s0 = cfg.instance.initial_state().sample(rng);
        const EpisodeResult ep = play_episode<Binary>(cfg.instance, policy, agent, s0,
                                                      cfg.episode_cap, direct ? nullptr : oracle,
                                                      rng, regret);
        if (ep.truncated) ++local.truncated_episodes;
        local.total_steps += ep.steps;
        if (direct) {
            regret += play_genie_episode<Binary>(cfg.instance, s0, cfg.episode_cap, genie_rng) -
                      ep.reward_sum;
        }
        cum[static_cast<std::size_t>(k)] = regret;
    }
    if (stats) *stats = local;
    return cum;
}

struct BlockPartial {
    std::vector<double> sum, sumsq;
    std::int64_t truncated = 0;

    explicit BlockPartial(std::size_t k) : sum(k, 0.0), sumsq(k, 0.0) {}

    void add_trial(const std::vector<double>& cum) {
        for (std::size_t i = 0; i < cum.size(); ++i) {
            sum[i] += cum[i];
            sumsq[i] += cum[i] * cum[i];
        }
    }
};

}  // namespace

void SimConfig::validate() const {
    if (episodes < 1) throw std::invalid_argument("sim: episodes >= 1 required");
    if (runs < 1) throw std::invalid_argument("sim: runs >= 1 required");
    if (episode_cap < 1) throw std::invalid_argument("sim: episode_cap >= 1 required");
    policy.validate();
}

GapOracle GapOracle::solve(const BanditInstance& instance, int grid_size, double tol) {
    GapOracle oracle;
    if (instance.is_binary()) {
        const ValueSolution vs = solve_binary_values(instance);
        oracle.binary_gap0_ = vs.gap0;
        oracle.binary_gap1_ = vs.gap1;
    } else {
        oracle.general_ = std::make_shared<GeneralValueSolution>(
            solve_general_values(instance, grid_size, tol));
    }
    return oracle;
}

std::vector<double> run_trial(const SimConfig& config, const GapOracle* oracle,
                              std::uint64_t replication, TrialStats* stats) {
    if (config.estimator == Estimator::Decomposition && oracle == nullptr)
        throw std::invalid_argument("run_trial: decomposition estimator needs a gap oracle");
    return config.instance.is_binary()
               ? run_trial_impl<true>(config, oracle, replication, stats)
               : run_trial_impl<false>(config, oracle, replication, stats);
}

RegretTrace monte_carlo(const SimConfig& config) {
    config.validate();
    const std::int64_t runs = config.runs;
    const std::size_t k_len = static_cast<std::size_t>(config.episodes);

    GapOracle oracle;
    const GapOracle* oracle_ptr = nullptr;
    if (config.estimator == Estimator::Decomposition) {
        oracle = GapOracle::solve(config.instance, config.grid_size, config.solver_tol);
        oracle_ptr = &oracle;
    }

    const std::int64_t n_blocks = (runs + kBlockSize - 1) / kBlockSize;
    int workers = config.workers > 0 ? config.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers > n_blocks) workers = static_cast<int>(n_blocks);

    auto compute_block = [&](std::int64_t b) {
        BlockPartial part(k_len);
        const std::int64_t lo = b * kBlockSize;
        const std::int64_t hi = std::min(runs, lo + kBlockSize);
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            TrialStats stats;
            part.add_trial(run_trial(config, oracle_ptr, static_cast<std::uint64_t>(rep), &stats));
            part.truncated += stats.truncated_episodes;
        }
        return part;
    };

    BlockPartial global(k_len);
    if (workers <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) {
            const BlockPartial part = compute_block(b);
            for (std::size_t i = 0; i < k_len; ++i) {
                global.sum[i] += part.sum[i];
                global.sumsq[i] += part.sumsq[i];
            }
            global.truncated += part.truncated;
        }
    } else {
        std::atomic<std::int64_t> next{0};
        std::mutex mtx;
        std::condition_variable cv;
        std::map<std::int64_t, BlockPartial> ready;
        std::exception_ptr failure;

        auto work = [&]() {
            try {
                for (;;) {
                    const std::int64_t b = next.fetch_add(1);
                    if (b >= n_blocks) return;
                    BlockPartial part = compute_block(b);
                    std::lock_guard<std::mutex> lock(mtx);
                    ready.emplace(b, std::move(part));
                    cv.notify_all();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (!failure) failure = std::current_exception();
                cv.notify_all();
            }
        };

        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);

        // merge in block order as results arrive
        for (std::int64_t b = 0; b < n_blocks; ++b) {
            std::unique_lock<std::mutex> lock(mtx);
            cv.wait(lock, [&] { return failure || ready.count(b) > 0; });
            if (failure) break;
            BlockPartial part = std::move(ready.at(b));
            ready.erase(b);
            lock.unlock();
            for (std::size_t i = 0; i < k_len; ++i) {
                global.sum[i] += part.sum[i];
                global.sumsq[i] += part.sumsq[i];
            }
            global.truncated += part.truncated;
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    RegretTrace trace;
    trace.label = config.policy.label;
    trace.seed = config.master_seed;
    trace.config_hash = config.config_hash;
    trace.runs = runs;
    trace.truncated_episodes = global.truncated;
    trace.rows.resize(k_len);
    const double n = static_cast<double>(runs);
    for (std::size_t i = 0; i < k_len; ++i) {
        TraceRow& row = trace.rows[i];
        row.k = static_cast<std::int64_t>(i) + 1;
        row.mean_regret = global.sum[i] / n;
        if (runs >= 2) {
            double var = (global.sumsq[i] - n * row.mean_regret * row.mean_regret) / (n - 1.0);
            if (var < 0.0) var = 0.0;
            row.stddev = std::sqrt(var);
            row.ci95 = kZ95 * row.stddev / std::sqrt(n);
        } else {
            row.stddev = nan_value();
            row.ci95 = nan_value();
        }
    }
    normalize_by_logk(trace);
    return trace;
}

void normalize_by_logk(RegretTrace& trace) {
    for (TraceRow& row : trace.rows) {
        row.regret_over_logk =
            row.k >= 2 ? row.mean_regret / std::log(static_cast<double>(row.k)) : nan_value();
    }
}

EstimatorCrossCheck cross_validate_estimators(const SimConfig& config) {
    SimConfig decomp = config;
    decomp.estimator = Estimator::Decomposition;
    SimConfig direct = config;
    direct.estimator = Estimator::Direct;
    std::uint64_t x = config.master_seed ^ 0x5D1EC7ULL;
    direct.master_seed = splitmix64(x);

    const RegretTrace td = monte_carlo(decomp);
    const RegretTrace tr = monte_carlo(direct);
    EstimatorCrossCheck out;
    out.decomposition_mean = td.rows.back().mean_regret;
    out.decomposition_ci95 = td.rows.back().ci95;
    out.direct_mean = tr.rows.back().mean_regret;
    out.direct_ci95 = tr.rows.back().ci95;
    out.agree = std::abs(out.decomposition_mean - out.direct_mean) <=
                out.decomposition_ci95 + out.direct_ci95;
    return out;
}

}  // namespace maba
