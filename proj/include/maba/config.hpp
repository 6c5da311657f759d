#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maba/model.hpp"
#include "maba/policies.hpp"
#include "maba/simulator.hpp"

namespace maba {

// Parsed experiment file: one instance, one or more labelled policies, the
// simulation parameters and output options. Unknown keys are rejected.
struct ExperimentConfig {
    BanditInstance instance;
    std::vector<PolicySpec> policies;
    std::int64_t episodes = 20000;
    std::int64_t runs = 10000;
    std::uint64_t seed = kDefaultSeed;
    std::int64_t episode_cap = 1000000;
    Estimator estimator = Estimator::Decomposition;
    int grid_size = 1024;
    double solver_tol = 1e-10;
    std::string output_dir = "out";
    std::vector<std::string> output_formats = {"csv"};

    // SimConfig for one of the configured policies.
    SimConfig sim_config(std::size_t policy_index) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization: defaults resolved, keys sorted. serialize(parse(x))
// is idempotent.
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& config);
std::uint64_t fnv1a(const std::string& text);

}  // namespace maba
