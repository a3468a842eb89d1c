#pragma once

#include <array>
#include <cstdint>

namespace panelecm {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A draw is a pure function of (key, counter), so any element of any stream
/// can be produced independently of evaluation order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Seeded family of independent normal/uniform streams.
///
/// The 64-bit seed is the Philox key; the counter packs (stream, index):
/// word 0-1 the 64-bit draw index, word 2-3 the 64-bit stream id. Each block
/// yields two 53-bit uniforms; a draw consumes one block.
class RandomStreams {
public:
    explicit RandomStreams(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform in the open interval (0, 1).
    double uniform(std::uint64_t stream, std::uint64_t index) const noexcept;

    /// Standard normal by inverse-CDF transform of uniform(stream, index).
    double normal(std::uint64_t stream, std::uint64_t index) const;

private:
    std::uint64_t seed_;
};

}  // namespace panelecm
