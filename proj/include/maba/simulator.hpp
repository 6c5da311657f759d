#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "maba/model.hpp"
#include "maba/policies.hpp"
#include "maba/solver.hpp"

namespace maba {

// Default master seed; keeps bundled experiments reproducible out of the box.
inline constexpr std::uint64_t kDefaultSeed = 20240601ULL;

// Decomposition charges the gap function along the learner's own trajectory
// (exact in expectation, variance-reduced, monotone); Direct subtracts the
// realized episode reward from an independently simulated genie episode.
enum class Estimator { Decomposition, Direct };

struct SimConfig {
    BanditInstance instance;
    PolicySpec policy;
    std::int64_t episodes = 20000;  // K
    std::int64_t runs = 10000;
    std::uint64_t master_seed = kDefaultSeed;
    std::int64_t episode_cap = 1000000;
    Estimator estimator = Estimator::Decomposition;
    int workers = 0;  // 0: hardware concurrency
    // general-model solver parameters for the gap oracle
    int grid_size = 1024;
    double solver_tol = 1e-10;
    std::uint64_t config_hash = 0;

    void validate() const;
};

// Gap function V*(s) - Q*(s, a) of the configured instance, shared read-only
// across all replications.
class GapOracle {
public:
    static GapOracle solve(const BanditInstance& instance, int grid_size = 1024,
                           double tol = 1e-10);

    double gap(double state, int arm) const {
        if (general_) return general_->gap_at(state, arm);
        return state > 0.5 ? binary_gap1_[arm] : binary_gap0_[arm];
    }
    const GeneralValueSolution* general() const { return general_.get(); }

private:
    std::vector<double> binary_gap0_, binary_gap1_;
    std::shared_ptr<const GeneralValueSolution> general_;
};

struct TraceRow {
    std::int64_t k = 0;
    double mean_regret = 0.0;
    double stddev = 0.0;
    double ci95 = 0.0;
    double regret_over_logk = 0.0;
};

struct RegretTrace {
    std::string label;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::int64_t runs = 0;
    std::int64_t truncated_episodes = 0;
    std::vector<TraceRow> rows;
};

struct TrialStats {
    std::int64_t truncated_episodes = 0;
    std::int64_t total_steps = 0;
};

// Cumulative regret after each of the K episodes of one replication.
std::vector<double> run_trial(const SimConfig& config, const GapOracle* oracle,
                              std::uint64_t replication, TrialStats* stats = nullptr);

// Runs all replications (possibly concurrently), aggregating mean / std /
// 95% CI per episode index in a fixed order, so the trace is byte-identical
// for any worker count.
RegretTrace monte_carlo(const SimConfig& config);

// Fills the regret / log k column; the k = 1 entry is left as NaN.
void normalize_by_logk(RegretTrace& trace);

struct EstimatorCrossCheck {
    double decomposition_mean = 0.0;
    double decomposition_ci95 = 0.0;
    double direct_mean = 0.0;
    double direct_ci95 = 0.0;
    bool agree = false;
};

// Runs both estimators with independent seeds and compares the final-K means
// against the combined 95% confidence intervals.
EstimatorCrossCheck cross_validate_estimators(const SimConfig& config);

}  // namespace maba
