#include "metvol/config.hpp"

#include <fstream>

namespace metvol {

namespace {

Tolerances tolerances_from_json(const Json& j) {
    Tolerances t;
    static const std::vector<std::string> allowed = {
        "eps_opt",  "tau_rank_rel", "tau_sub_euclidean", "tau_sub_optimized",
        "tau_angle", "tau_proj",    "tau_dist",          "tau_cluster_floor",
        "mvee_eps",  "tau_sublevel", "q_max"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown tolerance key: " + it.key());
    t.eps_opt = j.value("eps_opt", t.eps_opt);
    t.tau_rank_rel = j.value("tau_rank_rel", t.tau_rank_rel);
    t.tau_sub_euclidean = j.value("tau_sub_euclidean", t.tau_sub_euclidean);
    t.tau_sub_optimized = j.value("tau_sub_optimized", t.tau_sub_optimized);
    t.tau_angle = j.value("tau_angle", t.tau_angle);
    t.tau_proj = j.value("tau_proj", t.tau_proj);
    t.tau_dist = j.value("tau_dist", t.tau_dist);
    t.tau_cluster_floor = j.value("tau_cluster_floor", t.tau_cluster_floor);
    t.mvee_eps = j.value("mvee_eps", t.mvee_eps);
    t.tau_sublevel = j.value("tau_sublevel", t.tau_sublevel);
    t.q_max = j.value("q_max", t.q_max);
    return t;
}

Json tolerances_to_json(const Tolerances& t) {
    return Json{{"eps_opt", t.eps_opt},
                {"tau_rank_rel", t.tau_rank_rel},
                {"tau_sub_euclidean", t.tau_sub_euclidean},
                {"tau_sub_optimized", t.tau_sub_optimized},
                {"tau_angle", t.tau_angle},
                {"tau_proj", t.tau_proj},
                {"tau_dist", t.tau_dist},
                {"tau_cluster_floor", t.tau_cluster_floor},
                {"mvee_eps", t.mvee_eps},
                {"tau_sublevel", t.tau_sublevel},
                {"q_max", t.q_max}};
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
    static const std::vector<std::string> allowed = {
        "dim", "norm", "cocycle", "seed", "N",   "q_max",
        "tolerances", "eta", "delta", "out"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown config key: " + it.key());

    ExperimentConfig c;
    if (!j.contains("cocycle")) throw ConfigError("config requires a cocycle");
    Json cocycle = j.at("cocycle");
    if (j.contains("norm") && !cocycle.contains("norm")) cocycle["norm"] = j.at("norm");
    if (j.contains("dim") && !cocycle.contains("dim")) cocycle["dim"] = j.at("dim");
    c.cocycle = cocycle_from_json(cocycle);
    c.space = AmbientSpace(c.cocycle.dim, c.cocycle.norm);

    c.seed = j.value("seed", 1ULL);
    c.N = j.value("N", 2000);
    c.q_max = j.value("q_max", std::min(4, c.space.dim));
    if (c.N < 1) throw ConfigError("N must be positive");
    if (c.q_max < 1) throw ConfigError("q_max must be positive");
    if (j.contains("tolerances")) c.tolerances = tolerances_from_json(j.at("tolerances"));
    c.eta = j.value("eta", 0.5);
    c.delta = j.value("delta", 0.0);

    if (j.contains("out")) {
        const Json& o = j.at("out");
        static const std::vector<std::string> out_allowed = {"report", "ledger", "cauchy"};
        for (auto it = o.begin(); it != o.end(); ++it)
            if (std::find(out_allowed.begin(), out_allowed.end(), it.key()) ==
                out_allowed.end())
                throw ConfigError("unknown out key: " + it.key());
        c.report_path = o.value("report", c.report_path);
        c.ledger_path = o.value("ledger", c.ledger_path);
        c.cauchy_path = o.value("cauchy", c.cauchy_path);
    }
    // Seed flows into the cocycle unless the cocycle pins its own.
    if (!cocycle.contains("seed")) c.cocycle.seed = c.seed;
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["dim"] = c.space.dim;
    j["norm"] = to_json(c.space.norm);
    j["cocycle"] = to_json(c.cocycle);
    j["seed"] = c.seed;
    j["N"] = c.N;
    j["q_max"] = c.q_max;
    j["tolerances"] = tolerances_to_json(c.tolerances);
    j["eta"] = c.eta;
    j["delta"] = c.delta;
    j["out"] = Json{{"report", c.report_path},
                    {"ledger", c.ledger_path},
                    {"cauchy", c.cauchy_path}};
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace metvol
