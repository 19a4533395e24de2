#ifndef SDELAB_NONUNIQUENESS_HPP
#define SDELAB_NONUNIQUENESS_HPP

#include <cstdint>
#include <vector>

#include "sdelab/kernels.hpp"
#include "sdelab/report.hpp"

namespace sdelab::verify {

struct NonuniquenessConfig {
    int d = 3;
    double p = 2.0;            // alpha = d/p
    double kappa = 1.2;        // in (1, (d-1)/alpha)
    std::vector<double> delta_ladder{0.5, 0.25, 0.125};
    std::vector<double> amplitude_ladder{1.0, 2.0, 4.0, 8.0, 16.0};  // pilot sweep for N
    double pilot_target = 0.3;  // required cone-event probability at delta = 0.5
    std::size_t pilot_paths = 4000;
    std::size_t paths = 200000;
    double horizon = 10.0;
    double dt = 0.01;
    double eps_over_delta = 0.1;  // regularization eps = delta / 10
    double gap_threshold = 5.0;   // in combined standard errors
    std::uint64_t seed = 424242;

    void validate() const;
};

/// Two-start comparison of the supercritical construction: for each delta the
/// axis start (0,..,0,delta) and the plane start (delta,0,..,0) share common
/// random numbers; the report carries both T-functional estimates with 99%
/// intervals, the cone-event probability of the axis arm, and the per-rung
/// gap statistic. Pass requires the plane arm compatible with zero (3 se),
/// the axis-plane gap above the threshold on every rung, and the pilot to
/// reach its cone-event target.
ExperimentReport nonuniqueness_experiment(const NonuniquenessConfig& cfg);

}  // namespace sdelab::verify

#endif
