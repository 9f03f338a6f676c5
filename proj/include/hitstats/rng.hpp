#pragma once

#include <array>
#include <cstdint>

namespace hitstats {

// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
// Streams are addressed by (seed, stream) key pairs, so any sample index can
// own an independent stream and parallel runs reproduce serial ones bitwise.

namespace philox {

inline constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
    __uint128_t p = static_cast<__uint128_t>(a) * b;
    lo = static_cast<std::uint64_t>(p);
    hi = static_cast<std::uint64_t>(p >> 64);
}

inline std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                          std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t lo0, hi0, lo1, hi1;
        mulhilo(kMult0, ctr[0], lo0, hi0);
        mulhilo(kMult1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace philox

/// One independent random stream; draws are a pure function of
/// (seed, stream, position).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{seed, stream}, counter_{0, 0, 0, 0} {}

    std::uint64_t next_u64() {
        if (index_ == 4) {
            ++counter_[0];
            if (counter_[0] == 0) ++counter_[1];
            index_ = 0;
            buffer_valid_ = false;
        }
        if (!buffer_valid_) {
            buffer_ = philox::block(counter_, key_);
            buffer_valid_ = true;
        }
        return buffer_[index_++];
    }

    /// Uniform double in [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo,hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_;
    std::array<std::uint64_t, 4> buffer_{};
    int index_ = 0;
    bool buffer_valid_ = false;
};

}  // namespace hitstats
