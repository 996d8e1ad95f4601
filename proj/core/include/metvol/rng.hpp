#pragma once

#include <cstdint>
#include <cmath>

#include "metvol/types.hpp"

namespace metvol {

// Counter-based generator ("splitmix64-counter" in the config schema).
// Every draw is a pure function of (seed, stream, counter), so operator
// streams replay identically regardless of evaluation order or thread
// count.  Streams are cheap to fork and never share state.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    // Independent substream; deterministic in (seed, stream, tag).
    RngStream fork(std::uint64_t tag) const {
        return RngStream(seed_, mix(stream_ ^ (0x9e3779b97f4a7c15ULL + tag)));
    }

    std::uint64_t next_u64() {
        return mix(seed_ ^ mix(stream_ ^ counter_++));
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) {  // in [0, n)
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Vector gaussian_vector(int d) {
        Vector v(d);
        for (int i = 0; i < d; ++i) v[i] = gaussian();
        return v;
    }

    // Uniform direction on the euclidean sphere S^{d-1}.
    Vector direction(int d) {
        Vector v = gaussian_vector(d);
        double n = v.norm();
        while (n < 1e-12) {
            v = gaussian_vector(d);
            n = v.norm();
        }
        return v / n;
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Halton low-discrepancy sequence, used for quasi-random boundary sampling.
double halton(std::uint64_t index, int base);

// Quasi-random direction on S^{d-1}: Halton point mapped through the
// inverse Gaussian CDF and normalized.
Vector halton_direction(std::uint64_t index, int d);

}  // namespace metvol
