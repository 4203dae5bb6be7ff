#pragma once

#include <cstdint>
#include <string_view>

namespace brns {

/// FNV-1a 64-bit hash. Used for purpose-keyed stream derivation and config digests.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Deterministic 64-bit random stream (xoshiro256++, seeded via splitmix64).
///
/// All sampling (including the Gaussian) is implemented on top of the raw
/// 64-bit output so that sequences are identical across standard libraries
/// and platforms. A stream is single-owner: never share one across threads.
///
/// Streams are derived from a single root seed with split(), keyed by a
/// purpose label. Derivation depends only on (root seed, label), so adding
/// a new consumer does not perturb the draws of existing ones.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform double in [0, 1).
    double next_double() noexcept;

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept;

    /// Uniform index in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n) noexcept;

    bool bernoulli(double p) noexcept;

    /// Standard normal via Box-Muller (second value cached).
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept;

    /// Child stream keyed by (root seed, purpose). Does not consume state.
    RngStream split(std::string_view purpose) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace brns
