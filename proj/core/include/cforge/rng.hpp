#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace cforge {

// Deterministic 64-bit generator (splitmix64). Used everywhere a seeded
// choice is made so that runs are reproducible across platforms; std::
// engines and std::shuffle are implementation-defined and would break
// byte-identical reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform-ish value in [0, n); n == 0 returns 0
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) return 0;
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    double unit() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // derive an independent stream, e.g. one per (seed, cell) pair
    static Rng derive(std::uint64_t seed, std::uint64_t salt) {
        Rng mix(seed ^ (0x9e3779b97f4a7c15ull * (salt + 1)));
        mix.next();
        return mix;
    }

private:
    std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace cforge
