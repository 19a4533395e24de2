#ifndef SDELAB_KERNELS_HPP
#define SDELAB_KERNELS_HPP

#include <array>
#include <cmath>
#include <stdexcept>

#include "sdelab/grid.hpp"

namespace sdelab::kernels {

/// Canonical cutoff: quintic smoothstep in u = 2r - 1, so g = 0 on [0, 1/2],
/// g = 1 on [1, inf), g' >= 0, and g is C^2 with g' in closed form.
struct Cutoff {
    static double g(double r) {
        const double u = std::clamp(2.0 * r - 1.0, 0.0, 1.0);
        return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    }
    static double dg(double r) {
        const double u = 2.0 * r - 1.0;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double v = u * (1.0 - u);
        return 60.0 * v * v;  // 2 * 30 u^2 (1-u)^2
    }
};

/// h(t, x) = (4 pi t)^(-d/2) exp(-|x|^2 / 4t)
double heat_kernel(double t, const Point& x, int d);
double heat_kernel_r2(double t, double r2, int d);

/// (1/2pi) (-x2, x1) / |x|^2; throws on x = 0.
std::array<double, 2> biot_savart(const std::array<double, 2>& x);

/// Vortex-blob regularization K |x|^2 / (|x|^2 + eps^2); divergence-free for
/// every eps because x . K = 0. eps = 0 recovers the singular kernel.
std::array<double, 2> biot_savart_blob(const std::array<double, 2>& x, double eps);

/// Parameters of the supercritical divergence-free drift built from the
/// stream quantity H = r^(d-1) psi(x_d) g(x_d / r), where psi = x_d^(-alpha)
/// or its eps-regularization. alpha = d/p must sit in (1, 2), which forces
/// p in (d/2, d) and d >= 3.
struct SupercriticalSpec {
    int d = 3;
    double p = 2.0;
    double amplitude = 1.0;  // N
    double epsilon = 0.0;    // regularization length

    double alpha() const { return d / p; }
    void validate() const {
        if (d < 3) throw std::invalid_argument("SupercriticalSpec: d >= 3");
        if (!(p > d / 2.0 && p < d)) throw std::invalid_argument("SupercriticalSpec: p in (d/2, d)");
        if (!(amplitude > 0.0)) throw std::invalid_argument("SupercriticalSpec: N > 0");
        if (epsilon < 0.0) throw std::invalid_argument("SupercriticalSpec: epsilon >= 0");
    }
    /// Upper bound on |b| over R^d (finite only for epsilon > 0).
    double sup_bound() const;
    /// |b(x)| <= bound_constant * |x_d|^(-alpha) on the support {r < 2|x_d|}.
    double bound_constant() const;
};

/// Drift evaluation; x must avoid the origin when epsilon = 0.
/// Odd under x_d -> -x_d, zero on {x_d = 0} and outside {|x_d| > r/2}.
Point supercritical_drift(const Point& x, const SupercriticalSpec& spec);

}  // namespace sdelab::kernels

#endif
