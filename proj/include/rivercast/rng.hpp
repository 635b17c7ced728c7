#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace rivercast {

/// SplitMix64 step; used for seeding and for mixing seeds with indices.
std::uint64_t splitmix64(std::uint64_t& state);

/// Combines a seed with a stream index into a new, well-scrambled seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// 64-bit FNV-1a. Stable across platforms; used for stream names and fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

/// xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
///
/// All derived variates are computed by the formulas below rather than by
/// <random> distributions, whose algorithms differ between standard libraries:
///   uniform()     = (next() >> 11) * 2^-53, in [0, 1)
///   normal()      = Box-Muller on two uniforms, cosine branch only
///   exponential() = -log(1 - u), inverse-CDF sampling
///   below(n)      = Lemire's multiply-shift with rejection
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream keyed by name, so adding a stream never perturbs another.
    static Rng stream(std::uint64_t seed, std::string_view name);

    std::uint64_t next();
    double uniform();
    double normal();
    double exponential();
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t s_[4];
};

/// Fisher-Yates shuffle driven by Rng::below.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace rivercast
