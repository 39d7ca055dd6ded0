#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace posnet {

/// Identifies a reproducible random stream. Same (seed, stream_id) always
/// produces the same draws; distinct stream_ids give independent streams.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Derive a statistically independent child stream.
    [[nodiscard]] RngStream substream(std::uint64_t tag) const noexcept {
        // splitmix64 finalizer over (stream_id, tag)
        std::uint64_t z = stream_id + 0x9E3779B97F4A7C15ull * (tag + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return {seed, z ^ (z >> 31)};
    }
};

namespace detail {

// Philox4x64-10 counter-based generator (Salmon et al., Random123 constants).
inline std::array<std::uint64_t, 4> philox_block(const RngStream& s, std::uint64_t counter) noexcept {
    constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t M1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t W1 = 0xBB67AE8584CAA73Bull;

    std::uint64_t c0 = counter, c1 = 0, c2 = s.stream_id, c3 = 0x243F6A8885A308D3ull;
    std::uint64_t k0 = s.seed, k1 = s.stream_id ^ 0x452821E638D01377ull;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) { k0 += W0; k1 += W1; }
        const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * c0;
        const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * c2;
        const std::uint64_t lo0 = static_cast<std::uint64_t>(p0), hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const std::uint64_t lo1 = static_cast<std::uint64_t>(p1), hi1 = static_cast<std::uint64_t>(p1 >> 64);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
    }
    return {c0, c1, c2, c3};
}

} // namespace detail

/// Sequential sampler over one stream. Deterministic: the n-th draw is a pure
/// function of (stream, n). Not shared between threads; parallel code derives
/// one substream per work block instead.
class Rng {
public:
    explicit Rng(RngStream stream) : stream_(stream) {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            block_ = detail::philox_block(stream_, counter_++);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (lo, hi].
    double uniform_in(double lo, double hi) {
        const double u = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        return lo + (hi - lo) * u;
    }

    /// Standard normal via Box-Muller; consumes uniforms in pairs.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;       // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill_gaussian(std::span<double> out) {
        for (double& v : out) v = gaussian();
    }

    [[nodiscard]] const RngStream& stream() const noexcept { return stream_; }

private:
    RngStream stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace posnet
