#pragma once

#include <cstdint>
#include <string_view>

namespace hermnet {

/// xoshiro256** seeded through SplitMix64. Fixed algorithms, so streams are
/// identical on every platform; normals come from Box-Muller rather than
/// std::normal_distribution, whose output is implementation-defined.
class Rng {
public:
    static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64/box-muller";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal.
    double normal();

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hermnet
