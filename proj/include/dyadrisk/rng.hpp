#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dyadrisk {

// Seed plumbing. A single master seed fans out to per-task substreams by
// hashing (master, stream-name); results are therefore independent of
// execution order and thread count.
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed);  // chainable
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

// mt19937_64 gives an identical stream on every conforming platform; the
// distributions here are hand-rolled because the std:: ones are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // [0,1), 53-bit resolution
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n);

    // standard normal via Box-Muller (two engine draws per call)
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // exponential with given mean
    double exponential(double mean);

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace dyadrisk
