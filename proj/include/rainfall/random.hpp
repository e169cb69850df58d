#pragma once

#include <cstdint>
#include <random>

namespace rainfall {

/// Seed of the independent stream used by replicate `index` of a run seeded with
/// `seed`. Replicate r uses seed XOR r; the generator scrambles it on construction.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ index; }

/// Platform-stable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are not, so every variate is
/// produced here from raw engine output:
///   - uniform: top 53 bits of one engine draw, in the open interval (0, 1)
///   - normal: Marsaglia polar method
///   - gamma: Marsaglia-Tsang squeeze/rejection for shape >= 1, with the
///     U^(1/shape) boost for shape < 1
///   - exponential: inversion, -log(U) / rate
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    double uniform();
    double exponential(double rate);
    double normal();
    double gamma(double shape, double scale);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace rainfall
