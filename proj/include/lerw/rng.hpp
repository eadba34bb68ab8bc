#ifndef LERW_RNG_HPP
#define LERW_RNG_HPP

#include <cmath>
#include <cstdint>

namespace lerw {

namespace detail {
// SplitMix64 finalizer (Steele/Lea/Flood). Passes BigCrush as a stream.
inline std::uint64_t splitmix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based stream: output #n is a pure function of
// (master seed, stream index, n). Streams with distinct indices are
// independent and replayable regardless of scheduling, so parallel trials
// reproduce bitwise no matter the worker count.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : key_(detail::splitmix(detail::splitmix(master_seed + 0x9E3779B97F4A7C15ULL) ^
                                detail::splitmix(stream_index ^ 0xD1342543DE82EF95ULL))),
          seed_(master_seed),
          stream_(stream_index) {}

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_; }
    std::uint64_t counter() const { return ctr_; }

    std::uint64_t next_u64() { return detail::splitmix(key_ + (ctr_++) * 0x9E3779B97F4A7C15ULL); }

    // Uniform in [0,1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in {0,...,n-1}, bias-free (Lemire's method with rejection).
    std::uint64_t next_below(std::uint64_t n) {
        std::uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = -n % n;
            while (lo < t) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Standard normal via Box-Muller (spare discarded to keep the output a
    // pure function of the counter sequence consumed).
    double next_normal() {
        double u1 = 0;
        do { u1 = next_double(); } while (u1 == 0.0);
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t ctr_ = 0;
};

}  // namespace lerw

#endif
