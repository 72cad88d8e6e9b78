#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dtfdd {

/// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a sequence of stream keys into a parent seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept
{
    std::uint64_t s = mix_seed(seed);
    for (auto k : keys) {
        s = mix_seed(s ^ mix_seed(k + 0x632be59bd9b4e019ULL));
    }
    return s;
}

/// Seedable, splittable random source.
///
/// Every draw goes through the raw 64-bit engine output so that runs are
/// bit-reproducible across standard library implementations (the
/// std::*_distribution algorithms are implementation-defined).
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Child source for an independent stream; does not advance this source.
    RandomSource split(std::uint64_t stream) const { return RandomSource(derive_seed(seed_, {stream})); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform_open0()
    {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(uniform_open0()); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace dtfdd
