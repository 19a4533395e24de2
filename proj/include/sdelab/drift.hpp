#ifndef SDELAB_DRIFT_HPP
#define SDELAB_DRIFT_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sdelab/grid.hpp"
#include "sdelab/kernels.hpp"

namespace sdelab::drift {

struct SingularPointError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Evaluable time-dependent vector field. Evaluation is pure and reentrant;
/// table-backed drifts precompute immutable grids and serve concurrent
/// lookups.
class DriftField {
public:
    virtual ~DriftField() = default;
    virtual int dim() const = 0;
    virtual Point eval(double t, const Point& x) const = 0;
    virtual bool divergence_free() const = 0;
    /// sup |b| over space-time; +inf when unbounded.
    virtual double sup_bound() const = 0;
    virtual std::vector<Point> singular_points() const { return {}; }
    virtual std::string describe() const = 0;
};

using DriftPtr = std::shared_ptr<const DriftField>;

DriftPtr zero_drift(int d);
DriftPtr constant_drift(int d, const Point& c);
/// Biot-Savart kernel as a drift; eps = 0 is the singular kernel (rejected by
/// the SDE engine), eps > 0 the divergence-free vortex blob.
DriftPtr biot_savart_drift(double eps);
DriftPtr supercritical_drift_field(const kernels::SupercriticalSpec& spec);
DriftPtr custom_drift(int d, std::function<Point(double, const Point&)> f, bool divergence_free,
                      double sup_bound, std::string name = "custom");

/// Two-component bilinear lookup table on a node-centered 2-d grid.
DriftPtr table_drift(SampledField velocity2, bool divergence_free, std::string name);

/// Time-dependent table drift: one velocity table per time node, nearest
/// frame in time (the frozen-convolution kind b = K * rho(t)).
DriftPtr frozen_frames_drift(std::vector<double> times, std::vector<SampledField> velocities,
                             bool divergence_free, std::string name);

/// b = K_eps * rho (vortex-blob velocity of a grid density), computed by
/// zero-padded linear convolution; rho is rasterized on `table` geometry.
DriftPtr blob_velocity_drift(const MeasureSpec& vorticity, const GridSpec& table, double eps);

/// Spatial mollification b * rho_n at scale 1/n (even unit-mass bump).
/// d = 2 bases become grid tables (zero-padded FFT convolution); d = 3 bases
/// are mollified on demand by quadrature against the bump stencil.
DriftPtr mollify_drift(const DriftPtr& base, int level, const GridSpec& table);

/// Samples the drift components on a grid; cell-centered grids keep samples
/// off the singular points.
SampledField sample_drift(const DriftField& b, const GridSpec& g, double t = 0.0);

struct DivergenceReport {
    double max_central_divergence = 0.0;  // over admitted grid points
    double max_weak_residual = 0.0;       // max over bumps of |int b . grad phi| / ||grad phi||_L1
};

/// Central-difference divergence over the region, excluding balls of radius
/// exclusion_radius around singular points, plus the weak-form residual
/// against random compactly supported test bumps.
DivergenceReport divergence_check(const DriftField& b, const GridSpec& region,
                                  double exclusion_radius, int bumps = 20,
                                  std::uint64_t seed = 1);

}  // namespace sdelab::drift

#endif
