#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gpcrbo {

// All randomness in a run flows from one 64-bit seed. Named sub-streams
// (e.g. "noise", "acquisition") are derived by hashing the name and an
// optional index into the seed, so a component can be re-seeded in isolation
// and replays stay bit-identical. Variates are generated by hand (not via
// std:: distributions) so sequences do not depend on the standard library
// implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    // Sub-stream derived from this stream's root seed, a label, and an
    // index; independent of how many variates were already drawn here.
    Rng sub(std::string_view name, std::uint64_t index = 0) const;

    // Uniform on [0, 1).
    double uniform();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Marsaglia's polar method.
    double normal();

    double normal(double mean, double std_dev) { return mean + std_dev * normal(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64 step, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace gpcrbo
