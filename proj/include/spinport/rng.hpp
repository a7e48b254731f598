// rng.hpp
// Counter-based random number generation (Philox 4x32-10).
//
// Every random draw is a pure function of (seed, stream, counter), so
// Monte Carlo shots can be generated independently and in any order while
// still producing identical results for a fixed seed. This is what makes
// the sweep/shot parallelism schedule-independent.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace spinport::rng {

// One 10-round Philox 4x32 block. Key is derived from (seed, stream),
// counter words from (ctr_hi, ctr_lo).
std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t counter);

// Map a u64 to (0, 1]; never returns 0 so log() is safe.
inline double to_unit_open(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Two standard normals from one Philox block via Box-Muller.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter);

// Fill `out` with standard normals for a given (seed, stream). Draw k of a
// stream is the same value regardless of call granularity.
void fill_normals(std::uint64_t seed, std::uint64_t stream, std::span<double> out);

// Sequential convenience wrapper over the counter-based core. Used where a
// stateful generator is the natural interface (homodyne sampling, tests).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto z = normal_pair(seed_, stream_, counter_++);
        spare_ = z[1];
        have_spare_ = true;
        return z[0];
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace spinport::rng
