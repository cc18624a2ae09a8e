#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace jqf {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// SplitMix64 finalizer; bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a named substream: mixes the master seed with a hash of the key
/// so a stream depends only on its own key, never on sibling streams.
std::uint64_t substream_seed(std::uint64_t master_seed, std::string_view key);

/// Deterministic generator built on std::mt19937_64 (output sequence fixed by
/// the standard) with hand-rolled bounded draws; std::*_distribution is
/// implementation-defined and must not be used where reruns have to be
/// byte-identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n); unbiased via rejection sampling.
    std::uint64_t below(std::uint64_t n);

    /// Uniform double in [0, 1) with 53 random bits.
    double unit();

    /// Standard normal deviate (Box-Muller, spare value cached).
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

/// k distinct indices drawn uniformly from [0, n) by partial Fisher-Yates.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k);

} // namespace jqf
