#include "panelecm/random.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace panelecm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

double RandomStreams::uniform(std::uint64_t stream, std::uint64_t index) const noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                  static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    const auto r = Philox4x32::generate(ctr, key);
    // 53 random bits, offset by half an ulp so the result is never 0 or 1.
    const std::uint64_t bits = (static_cast<std::uint64_t>(r[0] >> 5) << 26) | (r[1] >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStreams::normal(std::uint64_t stream, std::uint64_t index) const {
    const double u = uniform(stream, index);
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace panelecm
