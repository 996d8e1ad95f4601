#pragma once

#include <string>
#include <vector>

#include "metvol/serialize.hpp"

namespace metvol {

// One verified inequality family: a sweep of random draws with the count of
// violations beyond the declared slacks.
struct Certificate {
    std::string id;
    std::string description;
    long count = 0;
    long violations = 0;
    double worst_margin = -kInf;  // positive = violated by that much
    bool pass = true;
    std::string note;
};

struct SuiteResult {
    std::string suite;
    std::vector<Certificate> certificates;
    bool pass() const {
        for (const auto& c : certificates)
            if (!c.pass) return false;
        return true;
    }
};

// Sweep sizes.  Defaults are the quick CLI settings; the acceptance suite
// passes the full counts.
struct VerifyCounts {
    long gap_pairs = 1000;         // per norm
    long john_draws = 60;
    long john_vectors = 1000;      // per draw
    long block_triples = 60;       // per norm
    long ball_sections = 100;
    long perturbed_triples = 120;
    long auerbach_draws = 120;
    long misc = 40;                // smaller property sweeps
    int threads = 0;               // 0 = hardware concurrency

    // Sweep sizes at which the library's invariants are declared.
    static VerifyCounts full_scale() {
        VerifyCounts c;
        c.gap_pairs = 10000;
        c.john_draws = 1000;
        c.block_triples = 1000;
        c.ball_sections = 1000;
        c.perturbed_triples = 1000;
        c.auerbach_draws = 1000;
        c.misc = 200;
        return c;
    }
};

SuiteResult verify_geometry(std::uint64_t seed, const VerifyCounts& counts = {});
SuiteResult verify_volume(std::uint64_t seed, const VerifyCounts& counts = {});
SuiteResult verify_spectral(std::uint64_t seed, const VerifyCounts& counts = {});
SuiteResult verify_met(std::uint64_t seed, const VerifyCounts& counts = {});
std::vector<SuiteResult> verify_all(std::uint64_t seed, const VerifyCounts& counts = {});

Json to_json(const SuiteResult& r);

}  // namespace metvol
