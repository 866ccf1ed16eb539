#pragma once

#include <array>
#include <cstdint>

namespace lear {

/// SplitMix64 (Steele, Lea & Flood 2014), used to expand a 64-bit seed into
/// xoshiro state.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    std::uint64_t next() noexcept;

private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna). State is seeded with four
/// consecutive SplitMix64 outputs; independent streams come from jump(),
/// which advances the state by 2^128 draws.
class Xoshiro256StarStar {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256StarStar(std::uint64_t seed) noexcept;
    explicit Xoshiro256StarStar(const std::array<std::uint64_t, 4>& state) noexcept : s_(state) {}

    std::uint64_t next() noexcept;
    std::uint64_t operator()() noexcept { return next(); }
    void jump() noexcept;

    /// (x >> 11) * 2^-53, in [0, 1).
    double uniform() noexcept;

    [[nodiscard]] const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

private:
    std::array<std::uint64_t, 4> s_;
};

/// Standard normal draws by the Box-Muller transform. Each pair of uniforms
/// u1 = ((x1 >> 11) + 1) * 2^-53 in (0, 1], u2 = (x2 >> 11) * 2^-53 yields
/// r cos(2 pi u2) then r sin(2 pi u2), r = sqrt(-2 ln u1).
class NormalStream {
public:
    explicit NormalStream(Xoshiro256StarStar engine) noexcept : engine_(engine) {}

    double next() noexcept;

private:
    Xoshiro256StarStar engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace lear
