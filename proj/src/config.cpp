#include "maba/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace maba {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
    }
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
    if (!obj.at(key).is_number()) fail(where + "." + key, "expected a number");
    return obj.at(key).get<double>();
}

InitialState parse_initial_state(const json& node, const std::string& where) {
    InitialState init;
    if (node.is_number()) {
        init = InitialState::point_mass(node.get<double>());
    } else if (node.is_array()) {
        for (const auto& entry : node) {
            if (!entry.is_array() || entry.size() != 2)
                fail(where, "expected [value, probability] pairs");
            init.support.emplace_back(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    } else {
        fail(where, "expected a number or an array of [value, probability] pairs");
    }
    return init;
}

BanditInstance parse_instance(const json& node) {
    const std::string where = "instance";
    if (!node.is_object()) fail(where, "expected an object");
    check_keys(node, where, {"means", "abandonment", "initial_state"});
    if (!node.contains("means") || !node.at("means").is_array())
        fail(where + ".means", "expected an array of arm means");
    std::vector<double> means = node.at("means").get<std::vector<double>>();

    if (!node.contains("abandonment")) fail(where, "missing key 'abandonment'");
    const json& ab = node.at("abandonment");
    const std::string aw = where + ".abandonment";
    if (!ab.is_object() || !ab.contains("type")) fail(aw, "missing 'type'");
    const std::string type = ab.at("type").get<std::string>();

    Abandonment abandonment = BinaryAbandonment(1, 0, 0, 0);
    if (type == "binary") {
        check_keys(ab, aw, {"type", "q00", "q01", "q10", "q11"});
        abandonment = BinaryAbandonment(get_number(ab, aw, "q00"), get_number(ab, aw, "q01"),
                                        get_number(ab, aw, "q10"), get_number(ab, aw, "q11"));
    } else if (type == "general") {
        if (!ab.contains("curve")) fail(aw, "missing 'curve'");
        const std::string curve = ab.at("curve").get<std::string>();
        if (curve == "log") {
            check_keys(ab, aw, {"type", "curve", "c6", "theta"});
            abandonment = GeneralAbandonment::log_family(get_number(ab, aw, "c6"),
                                                         get_number(ab, aw, "theta"));
        } else if (curve == "table") {
            check_keys(ab, aw, {"type", "curve", "points", "theta"});
            if (!ab.contains("points") || !ab.at("points").is_array())
                fail(aw + ".points", "expected an array of [s, q] pairs");
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : ab.at("points")) {
                if (!p.is_array() || p.size() != 2) fail(aw + ".points", "expected [s, q] pairs");
                pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            }
            abandonment = GeneralAbandonment::table(std::move(pts), get_number(ab, aw, "theta"));
        } else {
            fail(aw + ".curve", "expected 'log' or 'table'");
        }
    } else {
        fail(aw + ".type", "expected 'binary' or 'general'");
    }

    InitialState init = InitialState::point_mass(1.0);
    if (node.contains("initial_state"))
        init = parse_initial_state(node.at("initial_state"), where + ".initial_state");
    try {
        return BanditInstance(ArmSet(std::move(means)), std::move(abandonment), std::move(init));
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
}

Orientation parse_orientation(const std::string& name, const std::string& where) {
    if (name == "standard") return Orientation::Standard;
    if (name == "opposite") return Orientation::Opposite;
    fail(where, "expected 'standard' or 'opposite'");
}

PolicySpec parse_policy(const json& node, std::size_t index) {
    const std::string where = "policies[" + std::to_string(index) + "]";
    if (!node.is_object()) fail(where, "expected an object");
    check_keys(node, where,
               {"kind", "label", "orientation", "c0", "c1", "c", "n_bins", "epsilon", "H",
                "bonus_c"});
    if (!node.contains("kind")) fail(where, "missing key 'kind'");
    PolicyKind kind;
    try {
        kind = parse_kind(node.at("kind").get<std::string>());
    } catch (const std::invalid_argument& e) {
        fail(where + ".kind", e.what());
    }
    Orientation orientation = Orientation::Standard;
    if (node.contains("orientation"))
        orientation =
            parse_orientation(node.at("orientation").get<std::string>(), where + ".orientation");

    PolicySpec spec = PolicySpec::make(kind, orientation);
    if (node.contains("label")) spec.label = node.at("label").get<std::string>();
    if (node.contains("c0")) spec.c0 = get_number(node, where, "c0");
    if (node.contains("c1")) spec.c1 = get_number(node, where, "c1");
    if (node.contains("c")) spec.c = get_number(node, where, "c");
    if (node.contains("n_bins")) spec.n_bins = static_cast<int>(get_number(node, where, "n_bins"));
    if (node.contains("epsilon")) spec.epsilon = get_number(node, where, "epsilon");
    if (node.contains("H")) spec.h = get_number(node, where, "H");
    if (node.contains("bonus_c")) spec.bonus_c = get_number(node, where, "bonus_c");
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    return spec;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
    check_keys(root, "config", {"instance", "policies", "sim", "solver", "output"});
    if (!root.contains("instance")) throw std::invalid_argument("config: missing 'instance'");
    if (!root.contains("policies") || !root.at("policies").is_array() ||
        root.at("policies").empty())
        throw std::invalid_argument("config: 'policies' must be a non-empty array");

    ExperimentConfig cfg{parse_instance(root.at("instance"))};
    for (std::size_t i = 0; i < root.at("policies").size(); ++i)
        cfg.policies.push_back(parse_policy(root.at("policies").at(i), i));
    std::set<std::string> labels;
    for (const auto& p : cfg.policies) {
        if (!labels.insert(p.label).second)
            throw std::invalid_argument("config: duplicate policy label '" + p.label + "'");
    }

    if (root.contains("sim")) {
        const json& sim = root.at("sim");
        check_keys(sim, "sim", {"episodes", "runs", "seed", "episode_cap", "estimator"});
        if (sim.contains("episodes"))
            cfg.episodes = static_cast<std::int64_t>(get_number(sim, "sim", "episodes"));
        if (sim.contains("runs"))
            cfg.runs = static_cast<std::int64_t>(get_number(sim, "sim", "runs"));
        if (sim.contains("seed")) {
            if (!sim.at("seed").is_number_integer() && !sim.at("seed").is_number_unsigned())
                fail("sim.seed", "expected an integer");
            cfg.seed = sim.at("seed").get<std::uint64_t>();
        }
        if (sim.contains("episode_cap"))
            cfg.episode_cap = static_cast<std::int64_t>(get_number(sim, "sim", "episode_cap"));
        if (sim.contains("estimator")) {
            const std::string est = sim.at("estimator").get<std::string>();
            if (est == "decomposition")
                cfg.estimator = Estimator::Decomposition;
            else if (est == "direct")
                cfg.estimator = Estimator::Direct;
            else
                fail("sim.estimator", "expected 'decomposition' or 'direct'");
        }
        if (cfg.episodes < 1) fail("sim.episodes", "must be >= 1");
        if (cfg.runs < 1) fail("sim.runs", "must be >= 1");
        if (cfg.episode_cap < 1) fail("sim.episode_cap", "must be >= 1");
    }
    if (root.contains("solver")) {
        const json& sol = root.at("solver");
        check_keys(sol, "solver", {"grid_size", "tol"});
        if (sol.contains("grid_size"))
            cfg.grid_size = static_cast<int>(get_number(sol, "solver", "grid_size"));
        if (sol.contains("tol")) cfg.solver_tol = get_number(sol, "solver", "tol");
        if (cfg.grid_size < 64) fail("solver.grid_size", "must be >= 64");
        if (!(cfg.solver_tol > 0)) fail("solver.tol", "must be positive");
    }
    if (root.contains("output")) {
        const json& out = root.at("output");
        check_keys(out, "output", {"dir", "formats"});
        if (out.contains("dir")) cfg.output_dir = out.at("dir").get<std::string>();
        if (out.contains("formats"))
            cfg.output_formats = out.at("formats").get<std::vector<std::string>>();
        for (const std::string& fmt : cfg.output_formats)
            if (fmt != "csv") fail("output.formats", "unsupported format '" + fmt + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    json inst;
    inst["means"] = cfg.instance.arms().means_user_order();
    if (cfg.instance.is_binary()) {
        const auto& ab = cfg.instance.binary_abandonment();
        inst["abandonment"] = {{"type", "binary"}, {"q00", ab.q00()}, {"q01", ab.q01()},
                               {"q10", ab.q10()}, {"q11", ab.q11()}};
    } else {
        const auto& ab = cfg.instance.general_abandonment();
        if (ab.is_log_family()) {
            inst["abandonment"] = {{"type", "general"}, {"curve", "log"}, {"c6", ab.c6()},
                                   {"theta", ab.theta()}};
        } else {
            json pts = json::array();
            for (const auto& [s, q] : ab.points()) pts.push_back({s, q});
            inst["abandonment"] = {
                {"type", "general"}, {"curve", "table"}, {"points", pts}, {"theta", ab.theta()}};
        }
    }
    json init = json::array();
    for (const auto& [value, prob] : cfg.instance.initial_state().support)
        init.push_back({value, prob});
    inst["initial_state"] = init;
    root["instance"] = inst;

    json pols = json::array();
    for (const auto& p : cfg.policies) {
        json node;
        node["kind"] = kind_name(p.kind);
        node["label"] = p.label;
        node["orientation"] = orientation_name(p.orientation);
        node["c0"] = p.c0;
        node["c1"] = p.c1;
        node["c"] = p.c;
        node["n_bins"] = p.n_bins;
        node["epsilon"] = p.epsilon;
        node["H"] = p.h;
        node["bonus_c"] = p.bonus_c;
        pols.push_back(node);
    }
    root["policies"] = pols;
    root["sim"] = {{"episodes", cfg.episodes},
                   {"runs", cfg.runs},
                   {"seed", cfg.seed},
                   {"episode_cap", cfg.episode_cap},
                   {"estimator", cfg.estimator == Estimator::Direct ? "direct" : "decomposition"}};
    root["solver"] = {{"grid_size", cfg.grid_size}, {"tol", cfg.solver_tol}};
    root["output"] = {{"dir", cfg.output_dir}, {"formats", cfg.output_formats}};
    return root.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    // identifies the experiment itself; where the traces land is not part of it
    ExperimentConfig canon = config;
    canon.output_dir = "out";
    canon.output_formats = {"csv"};
    return fnv1a(serialize_config(canon));
}

SimConfig ExperimentConfig::sim_config(std::size_t policy_index) const {
    SimConfig sc{instance, policies.at(policy_index)};
    sc.episodes = episodes;
    sc.runs = runs;
    sc.master_seed = seed;
    sc.episode_cap = episode_cap;
    sc.estimator = estimator;
    sc.grid_size = grid_size;
    sc.solver_tol = solver_tol;
    sc.config_hash = config_hash(*this);
    return sc;
}

}  // namespace maba
