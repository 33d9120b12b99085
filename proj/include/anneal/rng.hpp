#pragma once

#include <cmath>
#include <cstdint>

namespace anneal {

// Counter-based stream: output k depends only on (master seed, stream id, k),
// so any trajectory can be regenerated in isolation and results do not depend
// on how work is split across threads.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream)
        : key_(mix(mix(master_seed ^ 0x6a09e667f3bcc908ULL) ^
                   mix(stream * 0x9e3779b97f4a7c15ULL + 0xbb67ae8584caa73bULL))) {}

    std::uint64_t next_u64() {
        return mix(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
    }

    // uniform in (0,1)
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal, Box-Muller with one cached value
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace anneal
