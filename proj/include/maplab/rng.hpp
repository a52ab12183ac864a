#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace maplab {

// Counter-based stream derivation: every (master seed, replicate index) pair
// maps to an independent xoshiro256++ state through SplitMix64. The same pair
// always yields the same stream, independent of scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::uint64_t h = master_seed;
        (void)splitmix64(h);
        h ^= 0x6a09e667f3bcc909ULL + stream_index * 0x9e3779b97f4a7c15ULL;
        for (auto& s : state_) s = splitmix64(h);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0, 1); never returns 0 or 1.
    double uniform() {
        double u = ((*this)() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Index into a discrete distribution given by non-negative weights.
    template <class Container>
    std::size_t categorical(const Container& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        std::size_t k = 0;
        for (double w : weights) {
            if (u < w || k + 1 == static_cast<std::size_t>(weights.size())) return k;
            u -= w;
            ++k;
        }
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SeedPlan {
    std::uint64_t master_seed = 0;
    std::size_t replicates = 0;

    RngStream stream(std::size_t index) const { return RngStream(master_seed, index); }
};

}  // namespace maplab
