#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is a pure function of a 64-bit key
// and a 128-bit counter, so per-path streams can be opened in any order and
// on any thread without changing a single bit of output.

#include <array>
#include <cstdint>
#include <limits>

namespace exlab::rng {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// SplitMix64 finalizer; used to derive child seeds from (parent, index).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed of the `index`-th child stream of `master` within a named domain.
/// Distinct domains keep e.g. driver paths and sign choices uncorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t domain = 0) {
    return mix64(mix64(master ^ mix64(domain)) + index);
}

/// Domain tags for derive_seed.
enum Domain : std::uint64_t {
    kDriver = 0x4452495645ull,  // "DRIVE"
    kSigns = 0x5349474e53ull,   // "SIGNS"
    kRerun = 0x524552554eull,   // "RERUN"
};

inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform [0,1) value at an arbitrary 128-bit counter position. This is how
/// sign choices are keyed by (seed, epoch, rank) instead of by draw order.
inline double uniform_at(std::uint64_t key, std::uint64_t c_hi, std::uint64_t c_lo) {
    const auto out = philox4x32({static_cast<std::uint32_t>(c_lo), static_cast<std::uint32_t>(c_lo >> 32),
                                 static_cast<std::uint32_t>(c_hi), static_cast<std::uint32_t>(c_hi >> 32)},
                                {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
    return to_unit((std::uint64_t{out[0]} << 32) | out[1]);
}

/// UniformRandomBitGenerator over one Philox stream. Each block yields two
/// 64-bit outputs; the block counter occupies the low counter words and the
/// stream id the high ones.
class PhiloxEngine {
public:
    using result_type = std::uint64_t;

    explicit PhiloxEngine(std::uint64_t key, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}, stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (slot_ == 2) refill();
        return buffer_[slot_++];
    }

private:
    void refill() {
        const auto out = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                    key_);
        buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        ++block_;
        slot_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int slot_ = 2;
};

}  // namespace exlab::rng
