#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maba/config.hpp"
#include "maba/simulator.hpp"
#include "maba/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> runs;
    std::optional<std::int64_t> episodes;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    bool as_json = false;
};

void add_common(CLI::App* cmd, Options& opts, bool with_sim_flags) {
    cmd->add_option("--config", opts.config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_sim_flags) {
        cmd->add_option("--seed", opts.seed, "override the master seed");
        cmd->add_option("--runs", opts.runs, "override the replication count");
        cmd->add_option("--episodes", opts.episodes, "override the episode count K");
        cmd->add_option("--workers", opts.workers, "worker threads (0 = hardware)");
        cmd->add_option("--out", opts.out_dir, "output directory");
    }
}

maba::ExperimentConfig load(const Options& opts) {
    maba::ExperimentConfig cfg = maba::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.runs) cfg.runs = *opts.runs;
    if (opts.episodes) cfg.episodes = *opts.episodes;
    if (opts.out_dir) cfg.output_dir = *opts.out_dir;
    return cfg;
}

const char* orientation_str(maba::GapOrientation o) {
    switch (o) {
        case maba::GapOrientation::Standard: return "standard";
        case maba::GapOrientation::Opposite: return "opposite";
        case maba::GapOrientation::Degenerate: return "degenerate";
    }
    return "?";
}

const char* verdict_str(maba::ConditionVerdict v) {
    switch (v) {
        case maba::ConditionVerdict::Holds: return "holds";
        case maba::ConditionVerdict::Fails: return "fails";
        case maba::ConditionVerdict::NotApplicable: return "not-applicable";
    }
    return "?";
}

std::vector<int> user_order(const maba::ArmSet& arms) {
    std::vector<int> sorted_of_user(arms.size());
    for (int s = 0; s < arms.size(); ++s) sorted_of_user[arms.user_index(s)] = s;
    return sorted_of_user;
}

int disc_bins(const maba::ExperimentConfig& cfg) {
    int n_bins = 4;
    for (const auto& p : cfg.policies)
        if (p.kind == maba::PolicyKind::DiscUlcb || p.kind == maba::PolicyKind::DiscKlUlcb)
            n_bins = p.n_bins;
    return n_bins;
}

int cmd_solve_binary(const maba::ExperimentConfig& cfg, const Options& opts) {
    const maba::BanditInstance& inst = cfg.instance;
    const maba::ValueSolution vs = maba::solve_binary_values(inst);
    const maba::GapOrientation orient = maba::check_orientation(inst, vs);
    const maba::ConditionVerdict cond = maba::sufficient_condition(inst.binary_abandonment());
    const maba::EpisodeLengths len = maba::expected_episode_length(inst);
    const std::vector<int> order = user_order(inst.arms());

    if (opts.as_json) {
        json out;
        out["model"] = "binary";
        out["v0"] = vs.v0;
        out["v1"] = vs.v1;
        out["orientation"] = orientation_str(orient);
        out["sufficient_condition"] = verdict_str(cond);
        out["episode_length"] = {{"from0", len.from_state0}, {"from1", len.from_state1}};
        json arms_json = json::array();
        for (int u = 0; u < inst.num_arms(); ++u) {
            const int s = order[u];
            arms_json.push_back({{"mean", inst.arms().mean(s)},
                                 {"q0", vs.q0[s]},
                                 {"q1", vs.q1[s]},
                                 {"gap0", vs.gap0[s]},
                                 {"gap1", vs.gap1[s]}});
        }
        out["arms"] = arms_json;
        out["genie_policy_verified"] = maba::verify_optimal_policy(inst);
        if (!inst.arms().degenerate()) {
            const maba::BoundConstants bc = maba::bound_constants(inst);
            out["bounds"] = {{"ulcb_ub", bc.ulcb_ub},
                             {"klulcb_ub", bc.klulcb_ub},
                             {"lower_bound", bc.lower_bound},
                             {"ucb_ref", bc.ucb_ref},
                             {"klucb_ref", bc.klucb_ref}};
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::printf("model                 binary (%d arms)\n", inst.num_arms());
    std::printf("V*(0)                 %.12g\n", vs.v0);
    std::printf("V*(1)                 %.12g\n", vs.v1);
    std::printf("orientation           %s%s\n", orientation_str(orient),
                orient == maba::GapOrientation::Degenerate
                    ? "  (gaps equal; treated as standard)"
                    : "");
    std::printf("sufficient condition  %s\n", verdict_str(cond));
    std::printf("E[episode | s=0]      %.12g\n", len.from_state0);
    std::printf("E[episode | s=1]      %.12g\n", len.from_state1);
    std::printf("%-6s %-10s %-14s %-14s %-14s %-14s\n", "arm", "mean", "Q*(0,a)", "Q*(1,a)",
                "gap(0,a)", "gap(1,a)");
    for (int u = 0; u < inst.num_arms(); ++u) {
        const int s = order[u];
        std::printf("%-6d %-10.6g %-14.8g %-14.8g %-14.8g %-14.8g\n", u + 1,
                    inst.arms().mean(s), vs.q0[s], vs.q1[s], vs.gap0[s], vs.gap1[s]);
    }
    if (inst.arms().degenerate()) {
        std::printf("warning: mu(a_1) = mu(a_2); bound constants are undefined\n");
    } else {
        const maba::BoundConstants bc = maba::bound_constants(inst);
        std::printf("ulcb_ub               %.12g\n", bc.ulcb_ub);
        std::printf("klulcb_ub = lower     %.12g\n", bc.klulcb_ub);
        std::printf("ucb_ref               %.12g\n", bc.ucb_ref);
        std::printf("klucb_ref             %.12g\n", bc.klucb_ref);
    }
    return 0;
}

int cmd_solve_general(const maba::ExperimentConfig& cfg, const Options& opts) {
    const maba::BanditInstance& inst = cfg.instance;
    const maba::GeneralValueSolution vs =
        maba::solve_general_values(inst, cfg.grid_size, cfg.solver_tol);
    const bool gap_monotone = maba::check_gap_monotonicity(inst, vs);
    const std::vector<int> order = user_order(inst.arms());

    if (opts.as_json) {
        json out;
        out["model"] = "general";
        out["grid_size"] = vs.grid_size();
        out["converged"] = vs.converged();
        out["iterations"] = vs.iterations();
        out["residual"] = vs.residual();
        out["gap_monotone"] = gap_monotone;
        json values = json::array();
        for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
            values.push_back({{"s", s}, {"v", vs.value_at(s)}});
        out["values"] = values;
        json arms_json = json::array();
        for (int u = 0; u < inst.num_arms(); ++u) {
            const int s = order[u];
            arms_json.push_back({{"mean", inst.arms().mean(s)},
                                 {"gap_at_0", vs.gap_at(0.0, s)},
                                 {"gap_at_1", vs.gap_at(1.0, s)}});
        }
        out["arms"] = arms_json;
        if (!inst.arms().degenerate()) {
            const maba::GeneralBoundConstants gb =
                maba::general_bound_constants(inst, vs, disc_bins(cfg));
            out["bounds"] = {{"n_bins", gb.n_bins},
                             {"disc_ulcb_ub", gb.disc_ulcb_ub},
                             {"disc_klulcb_ub", gb.disc_klulcb_ub},
                             {"lower_bound", gb.lower_bound}};
        }
        std::cout << out.dump(2) << "\n";
        return vs.converged() ? 0 : 1;
    }

    std::printf("model                 general (%d arms, theta=%g)\n", inst.num_arms(),
                inst.general_abandonment().theta());
    std::printf("value iteration       %s after %ld sweeps (residual %.3g, grid %d)\n",
                vs.converged() ? "converged" : "NOT CONVERGED", vs.iterations(), vs.residual(),
                vs.grid_size());
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
        std::printf("V*(%.2f)              %.12g\n", s, vs.value_at(s));
    std::printf("gap monotonicity      %s\n", gap_monotone ? "holds on grid" : "VIOLATED");
    std::printf("%-6s %-10s %-14s %-14s\n", "arm", "mean", "gap(0,a)", "gap(1,a)");
    for (int u = 0; u < inst.num_arms(); ++u) {
        const int s = order[u];
        std::printf("%-6d %-10.6g %-14.8g %-14.8g\n", u + 1, inst.arms().mean(s),
                    vs.gap_at(0.0, s), vs.gap_at(1.0, s));
    }
    if (!inst.arms().degenerate()) {
        const maba::GeneralBoundConstants gb =
            maba::general_bound_constants(inst, vs, disc_bins(cfg));
        std::printf("disc_ulcb_ub(n=%d)     %.12g\n", gb.n_bins, gb.disc_ulcb_ub);
        std::printf("disc_klulcb_ub(n=%d)   %.12g\n", gb.n_bins, gb.disc_klulcb_ub);
        std::printf("lower_bound           %.12g\n", gb.lower_bound);
    }
    if (!vs.converged()) {
        std::fprintf(stderr, "error: value iteration hit the sweep cap before tol\n");
        return 1;
    }
    return 0;
}

int cmd_solve(const Options& opts) {
    const maba::ExperimentConfig cfg = load(opts);
    return cfg.instance.is_binary() ? cmd_solve_binary(cfg, opts) : cmd_solve_general(cfg, opts);
}

int cmd_bounds(const Options& opts) {
    const maba::ExperimentConfig cfg = load(opts);
    if (cfg.instance.is_binary()) {
        const maba::BoundConstants bc = maba::bound_constants(cfg.instance);
        if (opts.as_json) {
            json out = {{"ulcb_ub", bc.ulcb_ub},
                        {"klulcb_ub", bc.klulcb_ub},
                        {"lower_bound", bc.lower_bound},
                        {"ucb_ref", bc.ucb_ref},
                        {"klucb_ref", bc.klucb_ref},
                        {"orientation", orientation_str(bc.orientation)}};
            std::cout << out.dump(2) << "\n";
        } else {
            std::printf("orientation  %s\n", orientation_str(bc.orientation));
            std::printf("ulcb_ub      %.12g\n", bc.ulcb_ub);
            std::printf("klulcb_ub    %.12g\n", bc.klulcb_ub);
            std::printf("lower_bound  %.12g\n", bc.lower_bound);
            std::printf("ucb_ref      %.12g\n", bc.ucb_ref);
            std::printf("klucb_ref    %.12g\n", bc.klucb_ref);
            if (bc.degenerate_orientation)
                std::printf("warning: gaps equal in both states; standard treatment used\n");
        }
        return 0;
    }
    const maba::GeneralValueSolution vs =
        maba::solve_general_values(cfg.instance, cfg.grid_size, cfg.solver_tol);
    const maba::GeneralBoundConstants gb =
        maba::general_bound_constants(cfg.instance, vs, disc_bins(cfg));
    if (opts.as_json) {
        json out = {{"n_bins", gb.n_bins},
                    {"disc_ulcb_ub", gb.disc_ulcb_ub},
                    {"disc_klulcb_ub", gb.disc_klulcb_ub},
                    {"lower_bound", gb.lower_bound}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::printf("n_bins          %d\n", gb.n_bins);
        std::printf("disc_ulcb_ub    %.12g\n", gb.disc_ulcb_ub);
        std::printf("disc_klulcb_ub  %.12g\n", gb.disc_klulcb_ub);
        std::printf("lower_bound     %.12g\n", gb.lower_bound);
    }
    return vs.converged() ? 0 : 1;
}

std::vector<maba::RegretTrace> run_all_policies(const maba::ExperimentConfig& cfg,
                                                const Options& opts) {
    std::vector<maba::RegretTrace> traces;
    for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
        maba::SimConfig sim = cfg.sim_config(i);
        if (opts.workers) sim.workers = *opts.workers;
        std::fprintf(stderr, "simulating %-16s (K=%lld, runs=%lld)...", sim.policy.label.c_str(),
                     static_cast<long long>(sim.episodes), static_cast<long long>(sim.runs));
        std::fflush(stderr);
        const auto t0 = std::chrono::steady_clock::now();
        traces.push_back(maba::monte_carlo(sim));
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, " done in %.1fs\n", dt);
        if (traces.back().truncated_episodes > 0)
            std::fprintf(stderr, "warning: %s: %lld episodes hit the %lld-step cap\n",
                         sim.policy.label.c_str(),
                         static_cast<long long>(traces.back().truncated_episodes),
                         static_cast<long long>(sim.episode_cap));
    }
    return traces;
}

void write_traces(const maba::ExperimentConfig& cfg,
                  const std::vector<maba::RegretTrace>& traces) {
    fs::create_directories(cfg.output_dir);
    for (const auto& trace : traces) {
        const std::string path = (fs::path(cfg.output_dir) / (trace.label + ".csv")).string();
        maba::write_trace_csv(path, trace);
        std::fprintf(stderr, "wrote %s\n", path.c_str());
    }
}

void write_overlay(const maba::ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / "bounds.csv").string();
    if (cfg.instance.is_binary()) {
        maba::write_text_file(path, maba::bounds_to_csv(maba::bound_constants(cfg.instance)));
    } else {
        const maba::GeneralValueSolution vs =
            maba::solve_general_values(cfg.instance, cfg.grid_size, cfg.solver_tol);
        maba::write_text_file(path, maba::bounds_to_csv(maba::general_bound_constants(
                                        cfg.instance, vs, disc_bins(cfg))));
    }
    std::fprintf(stderr, "wrote %s\n", path.c_str());
}

int cmd_simulate(const Options& opts) {
    const maba::ExperimentConfig cfg = load(opts);
    write_traces(cfg, run_all_policies(cfg, opts));
    return 0;
}

int cmd_compare(const Options& opts) {
    const maba::ExperimentConfig cfg = load(opts);
    if (cfg.policies.size() < 2)
        throw std::invalid_argument("compare: config must define at least 2 policies");
    const std::vector<maba::RegretTrace> traces = run_all_policies(cfg, opts);
    write_traces(cfg, traces);
    write_overlay(cfg);
    std::printf("%-16s %14s %12s %16s\n", "policy", "final regret", "ci95", "regret/log K");
    for (const auto& trace : traces) {
        const maba::TraceRow& last = trace.rows.back();
        std::printf("%-16s %14.3f %12.3f %16.4f\n", trace.label.c_str(), last.mean_regret,
                    last.ci95, last.regret_over_logk);
    }
    return 0;
}

int cmd_validate(const Options& opts) {
    const maba::ExperimentConfig cfg = load(opts);
    bool ok = true;
    if (cfg.instance.is_binary()) {
        const bool genie_ok = maba::verify_optimal_policy(cfg.instance);
        std::printf("genie-policy brute force   %s\n", genie_ok ? "pass" : "FAIL");
        ok &= genie_ok;
    } else {
        const maba::GeneralValueSolution vs =
            maba::solve_general_values(cfg.instance, cfg.grid_size, cfg.solver_tol);
        const bool mono = maba::check_gap_monotonicity(cfg.instance, vs);
        std::printf("value iteration            %s\n", vs.converged() ? "pass" : "FAIL");
        std::printf("gap monotonicity           %s\n", mono ? "pass" : "FAIL");
        ok &= vs.converged();
    }
    maba::SimConfig sim = cfg.sim_config(0);
    if (opts.workers) sim.workers = *opts.workers;
    sim.episodes = std::min<std::int64_t>(cfg.episodes, 500);
    sim.runs = opts.runs ? *opts.runs : std::max<std::int64_t>(cfg.runs, 10000);
    std::fprintf(stderr, "cross-validating estimators on %s (K=%lld, runs=%lld)...\n",
                 sim.policy.label.c_str(), static_cast<long long>(sim.episodes),
                 static_cast<long long>(sim.runs));
    const maba::EstimatorCrossCheck check = maba::cross_validate_estimators(sim);
    std::printf(
        "estimator cross-check      %s (decomposition %.3f +- %.3f, direct %.3f +- %.3f)\n",
        check.agree ? "pass" : "FAIL", check.decomposition_mean, check.decomposition_ci95,
        check.direct_mean, check.direct_ci95);
    ok &= check.agree;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAB-A: bandits with state-dependent abandonment"};
    app.require_subcommand(1);
    Options opts;

    CLI::App* solve = app.add_subcommand("solve", "exact value/Q solution and model checks");
    add_common(solve, opts, false);
    solve->add_flag("--json", opts.as_json, "machine-readable output");

    CLI::App* bounds = app.add_subcommand("bounds", "asymptotic regret-bound constants");
    add_common(bounds, opts, false);
    bounds->add_flag("--json", opts.as_json, "machine-readable output");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo regret traces per policy");
    add_common(simulate, opts, true);

    CLI::App* compare =
        app.add_subcommand("compare", "simulate all policies, emit traces + bound overlay");
    add_common(compare, opts, true);

    CLI::App* validate = app.add_subcommand(
        "validate", "estimator cross-check and genie brute-force verification");
    add_common(validate, opts, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (bounds->parsed()) return cmd_bounds(opts);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (compare->parsed()) return cmd_compare(opts);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
