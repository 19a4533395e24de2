#ifndef SDELAB_INEQUALITIES_HPP
#define SDELAB_INEQUALITIES_HPP

#include <cstdint>
#include <string>

#include "sdelab/grid.hpp"
#include "sdelab/report.hpp"

namespace sdelab::lorentz {

enum class InequalityKind {
    holder,
    young,
    interpolation,
    ladyzhenskaya,
    gagliardo_nirenberg,
    poincare,
};

InequalityKind inequality_kind_from_string(const std::string& s);
std::string to_string(InequalityKind k);

/// Exponent tuples for each inequality; constructors validate the scaling
/// relation of the chosen kind and reject inadmissible tuples.
struct InequalityParams {
    InequalityKind kind = InequalityKind::holder;
    // holder / young: (p1,q1) x (p2,q2) -> (p,q)
    double p1 = 4.0, q1 = 2.0, p2 = 4.0, q2 = 2.0;
    // interpolation: p1 < p < p2, theta from 1/p = theta/p1 + (1-theta)/p2
    double theta = 0.5;
    double q = 2.0;  // free exponent where the inequality leaves one
    // gagliardo-nirenberg: alpha < sigma <= s
    double gn_alpha = 0.5, gn_sigma = 1.0, gn_s = 2.0;
    // poincare
    double poincare_q = 2.0;

    void validate() const;
};

struct SuiteConfig {
    int trials = 200;
    std::uint64_t seed = 1;
    int resolution = 128;        // second resolution is 2x
    double half_width = 8.0;
    int pilot_trials = 48;       // calibrate the fitted constant
    double pilot_margin = 2.0;
    double dilation_tol = 1e-8;
};

/// Evaluates LHS and RHS of one inequality on one field draw.
struct RatioSample {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio() const { return (lhs == 0.0 && rhs == 0.0) ? 0.0 : lhs / rhs; }
};

/// Random smooth compactly supported field: 1-8 anisotropic Gaussian bumps,
/// centers in [-L/2, L/2]^d, widths log-uniform in [L/64, L/8].
SampledField random_bump_field(const GridSpec& g, std::uint64_t seed, std::uint32_t instance);

RatioSample evaluate_inequality(const InequalityParams& params, const SampledField& f,
                                const SampledField& g_second);

/// Monte Carlo stress test of one Appendix inequality. Emits a CSV
/// (kind, trial, lhs, rhs, ratio) and a JSON summary
/// {kind, max_ratio, fitted_C, pass}; pass requires a finite fitted constant
/// with zero violations at two resolutions plus exact dilation covariance of
/// the ratio on power-of-two rescalings.
ExperimentReport inequality_suite(const InequalityParams& params, const SuiteConfig& cfg);

ExperimentReport inequality_suite(InequalityKind kind, int trials, std::uint64_t seed);

}  // namespace sdelab::lorentz

#endif
