#pragma once

#include <cstdint>

namespace lhf {

/// splitmix64: small, portable, and identical on every platform, which
/// std::uniform_real_distribution is not.
class SplitMix64
{
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

/// Independent stream for item i of a seeded batch.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t i)
{
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (i + 1)));
    return g.next();
}

} // namespace lhf
