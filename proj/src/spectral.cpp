#include "sdelab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace sdelab {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Spectral2D::Spectral2D(int points, double half_width)
    : m_(points), half_width_(half_width), rbuf_(static_cast<std::size_t>(points) * points),
      cbuf_(static_cast<std::size_t>(points) * (points / 2 + 1)) {
    if (points < 4 || (points & (points - 1)) != 0)
        throw std::invalid_argument("Spectral2D: points must be a power of two >= 4");
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_2d(m_, m_, rbuf_.data(),
                                     reinterpret_cast<fftw_complex*>(cbuf_.data()), FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(m_, m_, reinterpret_cast<fftw_complex*>(cbuf_.data()),
                                     rbuf_.data(), FFTW_ESTIMATE);
}

Spectral2D::~Spectral2D() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

std::vector<std::complex<double>> Spectral2D::forward(const std::vector<double>& real) const {
    if (real.size() != rbuf_.size()) throw std::invalid_argument("Spectral2D::forward: size mismatch");
    rbuf_ = real;
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_.data(),
                         reinterpret_cast<fftw_complex*>(cbuf_.data()));
    return cbuf_;
}

std::vector<double> Spectral2D::backward(std::vector<std::complex<double>> spec) const {
    if (spec.size() != spec_size()) throw std::invalid_argument("Spectral2D::backward: size mismatch");
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                         reinterpret_cast<fftw_complex*>(spec.data()), rbuf_.data());
    std::vector<double> out = rbuf_;
    const double norm = 1.0 / (static_cast<double>(m_) * m_);
    for (double& v : out) v *= norm;
    return out;
}

void Spectral2D::wavevector(std::size_t idx, double& kx, double& ky) const {
    const int half = m_ / 2 + 1;
    const int j = static_cast<int>(idx / half);   // row: first axis
    const int i = static_cast<int>(idx % half);   // half column: second axis
    const double base = M_PI / half_width_;
    const int nj = (j <= m_ / 2) ? j : j - m_;
    kx = base * nj;
    ky = base * i;
}

void Spectral2D::apply_heat(std::vector<std::complex<double>>& spec, double dt) const {
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        double kx, ky;
        wavevector(idx, kx, ky);
        spec[idx] *= std::exp(-(kx * kx + ky * ky) * dt);
    }
}

void Spectral2D::apply_power(std::vector<std::complex<double>>& spec, double exponent) const {
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        double kx, ky;
        wavevector(idx, kx, ky);
        const double k2 = kx * kx + ky * ky;
        spec[idx] *= (k2 == 0.0) ? 0.0 : std::pow(k2, 0.5 * exponent);
    }
}

void Spectral2D::dealias(std::vector<std::complex<double>>& spec) const {
    const int half = m_ / 2 + 1;
    const int cut = m_ / 3;
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        const int j = static_cast<int>(idx / half);
        const int i = static_cast<int>(idx % half);
        const int nj = (j <= m_ / 2) ? j : j - m_;
        if (std::abs(nj) > cut || i > cut) spec[idx] = 0.0;
    }
}

void Spectral2D::biot_savart(const std::vector<std::complex<double>>& rho_hat,
                             std::vector<std::complex<double>>& ux_hat,
                             std::vector<std::complex<double>>& uy_hat) const {
    ux_hat.assign(spec_size(), {0.0, 0.0});
    uy_hat.assign(spec_size(), {0.0, 0.0});
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t idx = 0; idx < rho_hat.size(); ++idx) {
        double kx, ky;
        wavevector(idx, kx, ky);
        const double k2 = kx * kx + ky * ky;
        if (k2 == 0.0) continue;
        // u = grad^perp psi with Delta psi = rho; equivalently u_hat = i (ky, -kx) rho_hat / |k|^2
        ux_hat[idx] = I * (ky / k2) * rho_hat[idx];
        uy_hat[idx] = I * (-kx / k2) * rho_hat[idx];
    }
}

std::vector<double> Spectral2D::gradient_component(const std::vector<double>& field, int axis) const {
    auto spec = forward(field);
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        double kx, ky;
        wavevector(idx, kx, ky);
        spec[idx] *= I * (axis == 0 ? kx : ky);
    }
    // Nyquist row is not differentiable symmetrically; drop it
    const int half = m_ / 2 + 1;
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        const int j = static_cast<int>(idx / half);
        const int i = static_cast<int>(idx % half);
        if (j == m_ / 2 || i == m_ / 2) spec[idx] = 0.0;
    }
    return backward(std::move(spec));
}

int Spectral2D::dyadic_min() const {
    return static_cast<int>(std::floor(std::log2(M_PI / half_width_)));
}

int Spectral2D::dyadic_max() const {
    return static_cast<int>(std::ceil(std::log2(M_PI / half_width_ * (m_ / 2)))) + 1;
}

std::vector<double> Spectral2D::dyadic_block(const std::vector<std::complex<double>>& spec, int j) const {
    std::vector<std::complex<double>> block(spec.size(), {0.0, 0.0});
    const double lo = std::pow(2.0, j);
    const double hi = 2.0 * lo;
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        double kx, ky;
        wavevector(idx, kx, ky);
        const double k = std::sqrt(kx * kx + ky * ky);
        if (k >= lo && k < hi) block[idx] = spec[idx];
    }
    return backward(std::move(block));
}

SampledField linear_convolution(const SampledField& f, const SampledField& g) {
    if (!f.grid().same_geometry(g.grid()))
        throw std::invalid_argument("linear_convolution: mismatched geometry");
    if (f.grid().dim != 2) throw std::invalid_argument("linear_convolution: 2-d only");
    const int m = f.grid().points;
    const int p = 2 * m;
    Spectral2D sp(p, 2.0 * f.grid().half_width);

    auto pad = [&](const SampledField& a) {
        std::vector<double> out(static_cast<std::size_t>(p) * p, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                out[static_cast<std::size_t>(i) * p + j] = a.at(static_cast<std::size_t>(i) * m + j);
        return out;
    };
    auto fh = sp.forward(pad(f));
    const auto gh = sp.forward(pad(g));
    for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= gh[i];
    const auto conv = sp.backward(std::move(fh));

    // c_i = h^d sum_j f_j g_{i-j+m/2}; the padded circular convolution at
    // index i+m/2 reproduces it with no wrap-around. On a node-centered grid
    // the index offset m/2 places the kernel origin exactly at x = 0; a
    // cell-centered grid reads the kernel with a fixed half-cell translation,
    // which leaves every rearrangement-invariant norm unchanged.
    SampledField out(f.grid(), 1);
    const double cell = f.grid().cell_measure();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const int pi = (i + m / 2) % p;
            const int pj = (j + m / 2) % p;
            out.at(static_cast<std::size_t>(i) * m + j) =
                conv[static_cast<std::size_t>(pi) * p + pj] * cell;
        }
    return out;
}

}  // namespace sdelab
