#ifndef SDELAB_SDE_HPP
#define SDELAB_SDE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdelab/drift.hpp"
#include "sdelab/grid.hpp"
#include "sdelab/report.hpp"

namespace sdelab::sde {

/// Noise coefficient is sqrt(2), fixed: the generator is Delta + b . grad.
inline constexpr double kNoiseScale = 1.4142135623730951;

struct SdeConfig {
    double start_time = 0.0;
    double horizon = 1.0;   // T
    double dt = 1e-2;       // base step; K dt = T - s to 1e-12
    std::size_t paths = 1000;
    enum class Scheme { euler_maruyama } scheme = Scheme::euler_maruyama;
    std::uint64_t master_seed = 0;
    std::uint32_t stream = 0;  // keep equal across arms for common random numbers

    int store_frames = 33;            // uniform subgrid of stored states (incl. endpoints)
    bool track_stopping = false;      // cone exit / hitting times
    bool track_exp_functional = false;  // streaming int e^-t sgn(x_d) g(|x_d|) dt

    /// Per-substep rule dt_local <= 0.1 (eps + dist to singularity) / |b|.
    bool adaptive_substeps = false;
    double regularization_eps = 0.0;
    int max_substeps_per_step = 100000;

    void validate() const;
    std::size_t steps() const;
    double step_of_frame(int frame) const;  // base-step index of a stored frame
};

/// tau_bar: first exit from C_{1,2}; tau: first exit from C_1;
/// sigma0: first hit of {x_d = 0}; sigma1: first hit of {x_d = 1} after
/// tau_bar. Cone C_{k,h} = { k |x_hat| < x_d < h }.
struct StoppingRecord {
    std::optional<double> tau_bar;
    std::optional<double> tau;
    std::optional<double> sigma0;
    std::optional<double> sigma1;
    double max_noise_increment = 0.0;  // diagnostic, not a pass criterion
};

using InitSpec = std::variant<Point, MeasureSpec>;

class PathEnsemble {
public:
    const SdeConfig& config() const { return config_; }
    int dim() const { return dim_; }
    std::size_t paths() const { return config_.paths; }
    std::size_t frames() const { return times_.size(); }
    double frame_time(std::size_t f) const { return times_[f]; }
    const std::vector<double>& frame_times() const { return times_; }

    /// State of path p at stored frame f.
    Point state(std::size_t p, std::size_t f) const;
    bool valid(std::size_t p) const { return valid_[p] != 0; }
    std::size_t valid_count() const;
    std::size_t invalid_count() const { return paths() - valid_count(); }

    const std::vector<StoppingRecord>& stopping() const { return stopping_; }
    const std::vector<double>& exp_functional() const { return exp_functional_; }

    std::size_t frame_nearest(double t, double tol) const;

    void write_paths_bin(const std::string& path) const;

private:
    friend PathEnsemble simulate(const drift::DriftPtr&, const InitSpec&, const SdeConfig&);
    SdeConfig config_;
    int dim_ = 2;
    std::vector<double> times_;
    std::vector<double> states_;  // paths x frames x dim
    std::vector<std::uint8_t> valid_;
    std::vector<StoppingRecord> stopping_;
    std::vector<double> exp_functional_;
};

/// Euler-Maruyama simulation X_{k+1} = X_k + b dt + sqrt(2 dt) xi with
/// counter-based per-path noise; bit-identical output at any worker count.
/// Raw singular drifts (sup bound = inf) are rejected.
PathEnsemble simulate(const drift::DriftPtr& b, const InitSpec& init, const SdeConfig& cfg);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo E int_{s+delta}^T f(t, X_t) exp(-int_s^t c) dt via the stored
/// frames (trapezoid in time, bilinear in space, nearest frame of f/c in
/// time). Paths leaving the field's box read f = 0; the count is reported
/// through `coverage_warnings` when non-null.
Estimate krylov_functional(const PathEnsemble& ens, const SpaceTimeField& f,
                           const SpaceTimeField* c = nullptr, double delta = 0.0,
                           std::size_t* coverage_warnings = nullptr);

/// E int_0^horizon e^-t sgn(x_d) g(|x_d|) dt; uses the streaming accumulator
/// when tracked, otherwise the stored frames. Also returns the e^-horizon
/// truncation bound.
struct TFunctional {
    Estimate estimate;
    double truncation_bound = 0.0;
};
TFunctional t_functional(const PathEnsemble& ens, double horizon);

/// Empirical probability of the key event
///   { tau_bar < 1 and tau_bar < tau, sigma1 > 1 + tau_bar }
/// with a Wilson interval, plus marginal stopping-time statistics.
ExperimentReport cone_statistics(const PathEnsemble& ens, double kappa, double ci_level = 0.99);

enum class DensityMethod { histogram, kde };

/// Density of X_t on a grid; nonnegative, integrates to the valid-path
/// fraction. KDE bandwidth below one cell is widened with a warning.
SampledField transition_density(const PathEnsemble& ens, double t, const GridSpec& grid,
                                DensityMethod method, double bandwidth = 0.0,
                                std::string* warning = nullptr);

/// Wilson score interval for a binomial proportion.
void wilson_interval(std::size_t successes, std::size_t n, double z, double& lo, double& hi);

}  // namespace sdelab::sde

#endif
