#pragma once

#include <string>

#include "metvol/serialize.hpp"

namespace metvol {

// Experiment description consumed by the command line tools.  Parsing is
// schema-strict: unknown keys are rejected.
struct ExperimentConfig {
    AmbientSpace space{1, NormSpec::euclidean()};
    CocycleSpec cocycle;
    std::uint64_t seed = 1;
    int N = 2000;
    int q_max = 4;
    Tolerances tolerances;

    // Verification-clause parameters.
    double eta = 0.5;      // cone aperture
    double delta = 0.0;    // rate slack; 0 = spectral-gap default

    std::string report_path = "report.json";
    std::string ledger_path = "ledger.csv";
    std::string cauchy_path = "cauchy.csv";
};

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);

}  // namespace metvol
