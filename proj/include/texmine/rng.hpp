#ifndef TEXMINE_RNG_HPP
#define TEXMINE_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace texmine {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Seed of the stream belonging to one (global seed, item id) pair.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) {
    return splitmix64(seed ^ splitmix64(fnv1a64(id)));
}

/// mt19937_64 with distribution code written out, so draws do not depend
/// on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    int index(int n) { return static_cast<int>(uniform() * n); }
    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace texmine

#endif // TEXMINE_RNG_HPP
