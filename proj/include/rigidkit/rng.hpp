#ifndef RIGIDKIT_RNG_HPP
#define RIGIDKIT_RNG_HPP

#include <cstdint>
#include <string_view>

namespace rigidkit {

// Deterministic splittable RNG. All randomness in the library flows from one
// seed through named substreams so individual components are reproducible in
// isolation, and the output is identical across platforms (no reliance on
// std::uniform_*_distribution, whose bit streams are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    // splitmix64
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // rejection-free modulo is fine here; bias is negligible for n << 2^64
        return next_u64() % n;
    }

    static std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
        // FNV-1a over the name, folded with the base seed
        std::uint64_t h = 1469598103934665603ULL;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        return seed ^ h;
    }

    static Rng substream(std::uint64_t seed, std::string_view name) {
        return Rng(substream_seed(seed, name));
    }

private:
    std::uint64_t state_;
};

} // namespace rigidkit

#endif
