#ifndef SDELAB_RNG_HPP
#define SDELAB_RNG_HPP

#include <array>
#include <cstdint>

namespace sdelab {

/// Philox4x32-10 counter-based generator. Every variate is addressed by
/// (seed, stream, path, step, substep, slot), so ensembles are reproducible
/// under any parallel schedule and adaptive substepping.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key);
};

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint32_t path)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream), path_(path) {}

    /// Standard normal, slot in [0, 510).
    double normal(std::uint32_t step, std::uint32_t substep, std::uint32_t slot) const;
    /// Uniform in (0, 1).
    double uniform(std::uint32_t step, std::uint32_t substep, std::uint32_t slot) const;

private:
    std::array<double, 2> normal_pair(std::uint32_t step, std::uint32_t substep, std::uint32_t pair) const;
    std::array<std::uint32_t, 4> raw(std::uint32_t step, std::uint32_t substep, std::uint32_t word) const;

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
    std::uint32_t path_;
};

/// Convenience stream for scalar draws (field generators, initial laws).
class ScalarRng {
public:
    ScalarRng(std::uint64_t seed, std::uint32_t stream, std::uint32_t instance = 0)
        : rng_(seed, stream, instance) {}
    double uniform() { return rng_.uniform(ctr_++, 0, 0); }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal() { return rng_.normal(ctr_++, 0, 0); }
    /// log-uniform on [a, b]
    double log_uniform(double a, double b);
    int uniform_int(int n);  // in [0, n)

private:
    CounterRng rng_;
    std::uint32_t ctr_ = 0;
};

}  // namespace sdelab

#endif
