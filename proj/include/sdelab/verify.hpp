#ifndef SDELAB_VERIFY_HPP
#define SDELAB_VERIFY_HPP

#include <cstdint>
#include <vector>

#include "sdelab/drift.hpp"
#include "sdelab/fpe.hpp"
#include "sdelab/grid.hpp"
#include "sdelab/lorentz.hpp"
#include "sdelab/report.hpp"
#include "sdelab/sde.hpp"

namespace sdelab::verify {

/// Minimal sandwich constants for the two-sided Gaussian bound
///   (1/C) h(t/C, y - x0) <= p(y) <= C h(C t, y - x0)
/// fitted on the covered set {p > floor} by bisection in C.
struct AronsonFit {
    double c_upper = 1.0;
    double c_lower = 1.0;
    bool upper_bounded = true;  // false: infeasible at C = 1e6
    bool lower_bounded = true;
    double coverage = 0.0;  // fraction of cells above the floor
    double t = 0.0;
    Point x0{0.0, 0.0, 0.0};
};

AronsonFit aronson_fit(const SampledField& density, double t, const Point& x0, double floor);

/// Aronson stability across mollification levels: densities from the linear
/// FPE solver with the velocity of `vorticity` mollified at each level, plus
/// the b = 0 reference where the sandwich is exactly tight.
ExperimentReport aronson_stability(const std::vector<int>& levels, double t_probe,
                                   const fpe::SolveConfig& cfg, double floor_rel = 1e-4);

struct KrylovScanConfig {
    std::vector<int> levels{2, 4, 8};
    std::vector<lorentz::KrylovIndex> exponents;
    int f_family = 12;
    std::size_t paths = 20000;
    double horizon = 1.0;
    double dt = 2e-3;
    std::uint64_t seed = 2024;
    Point start{0.0, 0.0, 0.0};
    double field_half_width = 10.0;
    int field_points = 128;
    int field_frames = 21;
    double stability_factor = 2.0;
};

/// Gaussian-bump space-time test family; member `index` is deterministic in
/// (seed, index).
SpaceTimeField krylov_test_field(const KrylovScanConfig& cfg, int index);

/// Ratio table E int f(t, X_t) dt / ||f||_{L^q_t L^p_x} per (level, exponent
/// pair, field); pass per admissible pair iff the max ratio at the highest
/// level stays within `stability_factor` of the lowest level.
ExperimentReport krylov_scan(const std::vector<drift::DriftPtr>& drifts_by_level,
                             const KrylovScanConfig& cfg);

struct HolderProbeConfig {
    std::size_t paths = 20000;
    double s = 0.0;
    double horizon = 1.0;
    double dt = 2e-3;
    std::uint64_t seed = 7;
    int pairs = 10;
    double min_gap = 1e-2;  // |x - x'| spans [min_gap, 100 min_gap]
    Point base{0.0, 0.0, 0.0};
};

struct HolderProbeResult {
    double alpha_hat = 0.0;
    double log_c_hat = 0.0;
    int pairs_used = 0;
    bool inconclusive = false;
};

/// Estimates v(s, x) = E_x int_s^T f(t, X_t) dt by Monte Carlo with common
/// random numbers across pair members, then fits log |v(x) - v(x')| against
/// log |x - x'|. Pairs whose difference is noise dominated (< 3 combined
/// standard errors) are excluded; fewer than 3 usable pairs flags the result
/// inconclusive.
HolderProbeResult holder_probe(const drift::DriftPtr& b, const SpaceTimeField& f,
                               const HolderProbeConfig& cfg);

}  // namespace sdelab::verify

#endif
