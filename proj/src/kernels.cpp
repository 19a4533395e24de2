#include "sdelab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdelab::kernels {

double heat_kernel_r2(double t, double r2, int d) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    return std::pow(4.0 * M_PI * t, -0.5 * d) * std::exp(-r2 / (4.0 * t));
}

double heat_kernel(double t, const Point& x, int d) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    return heat_kernel_r2(t, r2, d);
}

std::array<double, 2> biot_savart(const std::array<double, 2>& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    if (r2 == 0.0) throw std::domain_error("biot_savart: singular point x = 0");
    const double c = 1.0 / (2.0 * M_PI * r2);
    return {-x[1] * c, x[0] * c};
}

std::array<double, 2> biot_savart_blob(const std::array<double, 2>& x, double eps) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double den = r2 + eps * eps;
    if (den == 0.0) throw std::domain_error("biot_savart_blob: singular point x = 0");
    const double c = 1.0 / (2.0 * M_PI * den);
    return {-x[1] * c, x[0] * c};
}

namespace {

// psi_eps(z) = z (z^2 + eps^2)^(-(alpha+1)/2): equals z^(-alpha) for z > 0 at
// eps = 0 and extends to a smooth odd function for eps > 0.
double psi(double z, double alpha, double eps) {
    return z * std::pow(z * z + eps * eps, -0.5 * (alpha + 1.0));
}

double dpsi(double z, double alpha, double eps) {
    const double s = z * z + eps * eps;
    return std::pow(s, -0.5 * (alpha + 3.0)) * (eps * eps - alpha * z * z);
}

// |b| at cone coordinate s = z/r and height z, divided by N
double drift_magnitude(double z, double s, double alpha, double eps, int d) {
    const double gs = Cutoff::g(s);
    const double dgs = Cutoff::dg(s);
    if (gs == 0.0 && dgs == 0.0) return 0.0;
    const double ps = psi(z, alpha, eps);
    const double dps = dpsi(z, alpha, eps);
    const double bd = ps * ((d - 1) * gs - s * dgs);
    const double bi = (z / s) * dps * gs + ps * dgs;  // |x_hat| (psi' g + psi g'/r)
    return std::sqrt(bd * bd + bi * bi);
}

}  // namespace

double SupercriticalSpec::sup_bound() const {
    if (epsilon == 0.0) return std::numeric_limits<double>::infinity();
    const double a = alpha();
    double worst = 0.0;
    for (int iz = 0; iz <= 240; ++iz) {
        const double z = epsilon * std::pow(10.0, -3.0 + 6.0 * iz / 240.0);
        for (int is = 0; is <= 140; ++is) {
            const double s = 0.5 + 3.5 * is / 140.0;
            worst = std::max(worst, drift_magnitude(z, s, a, epsilon, d));
        }
    }
    return 1.1 * amplitude * worst;
}

double SupercriticalSpec::bound_constant() const {
    // |b(x)| <= C |x_d|^(-alpha) on the support; C from the eps = 0 bracket
    const double a = alpha();
    double worst = 0.0;
    for (int is = 0; is <= 20000; ++is) {
        const double s = 0.5 + 3.5 * is / 20000.0;
        const double gs = Cutoff::g(s);
        const double dgs = Cutoff::dg(s);
        const double bd = (d - 1) * gs - s * dgs;
        const double bi = a * gs / s - dgs;
        worst = std::max(worst, std::sqrt(bd * bd + bi * bi));
    }
    return amplitude * worst;
}

Point supercritical_drift(const Point& x, const SupercriticalSpec& spec) {
    const int d = spec.d;
    const double a = spec.alpha();
    const double eps = spec.epsilon;
    const double N = spec.amplitude;

    const double xd = x[d - 1];
    double r2 = 0.0;
    for (int i = 0; i < d - 1; ++i) r2 += x[i] * x[i];
    const double r = std::sqrt(r2);

    if (eps == 0.0 && xd == 0.0 && r == 0.0)
        throw std::domain_error("supercritical_drift: singular point x = 0");

    Point b{0.0, 0.0, 0.0};
    if (xd == 0.0) return b;  // antisymmetric extension vanishes on the plane
    const double z = std::abs(xd);
    const double sign = (xd > 0.0) ? 1.0 : -1.0;

    if (r == 0.0) {
        // axis limit of the formulas: g = 1, g' = 0
        b[d - 1] = sign * N * (d - 1) * psi(z, a, eps);
        return b;
    }

    const double s = z / r;
    if (s <= 0.5) return b;  // outside the cutoff support
    const double gs = Cutoff::g(s);
    const double dgs = Cutoff::dg(s);

    // For x_d > 0:  b_d = N r^(2-d) dH/dr = N psi ((d-1) g - s g')
    //               b_i = -N x_i r^(1-d) dH/dx_d = -N x_i (psi' g + psi g'/r)
    // with H = r^(d-1) psi(x_d) g(|x_d|/r). Since psi is odd and the cutoff
    // argument is even, the global field is the mirror extension
    // b(x) = R b(Rx), R = diag(1,..,1,-1): b_d odd, b_i even. Only this
    // extension keeps div b = 0 across the hyperplane {x_d = 0}.
    const double ps = psi(z, a, eps);
    const double dps = dpsi(z, a, eps);
    b[d - 1] = sign * N * ps * ((d - 1) * gs - s * dgs);
    const double radial = -N * (dps * gs + ps * dgs / r);
    for (int i = 0; i < d - 1; ++i) b[i] = radial * x[i];
    return b;
}

}  // namespace sdelab::kernels
