#ifndef SXAI_RNG_HPP
#define SXAI_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sxai {

// Counter-based generator: SplitMix64 finalizer applied to a (seed, stream)
// key plus a per-draw counter. Stateless apart from the counter, splittable
// by stream id, and identical on every platform. The algorithm is documented
// in docs/rng.md and fixed for all time; dumps and acceptance runs depend on
// its exact output.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) {
        key_ = mix(seed ^ mix(stream * kGolden + 0x6a09e667f3bcc909ULL));
    }

    std::uint64_t next_u64() { return mix(key_ + (counter_++) * kGolden); }

    // 53-bit uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]; safe to feed into log()
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller, cos branch only; consumes two draws per call
    double normal() {
        double u1 = uniform_open();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // uniform integer in [0, bound) via rejection-free 128-bit scaling
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace sxai

#endif
