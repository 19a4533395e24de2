#include "sdelab/rng.hpp"

#include <cmath>

namespace sdelab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t u = (static_cast<std::uint64_t>(a) << 32) | b;
    // (0, 1), never exactly 0 or 1
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::array<std::uint32_t, 4> CounterRng::raw(std::uint32_t step, std::uint32_t substep,
                                             std::uint32_t word) const {
    const std::array<std::uint32_t, 4> ctr{step, substep, path_, (stream_ << 8) | (word & 0xFFu)};
    return Philox4x32::block(ctr, key_);
}

std::array<double, 2> CounterRng::normal_pair(std::uint32_t step, std::uint32_t substep,
                                              std::uint32_t pair) const {
    const auto w = raw(step, substep, pair);
    const double u1 = to_unit(w[0], w[1]);
    const double u2 = to_unit(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

double CounterRng::normal(std::uint32_t step, std::uint32_t substep, std::uint32_t slot) const {
    const auto z = normal_pair(step, substep, slot >> 1);
    return z[slot & 1u];
}

double CounterRng::uniform(std::uint32_t step, std::uint32_t substep, std::uint32_t slot) const {
    const auto w = raw(step, substep, 0x80u | slot);
    return to_unit(w[0], w[1]);
}

double ScalarRng::log_uniform(double a, double b) {
    return a * std::exp(uniform() * std::log(b / a));
}

int ScalarRng::uniform_int(int n) {
    int v = static_cast<int>(uniform() * n);
    return v >= n ? n - 1 : v;
}

}  // namespace sdelab
