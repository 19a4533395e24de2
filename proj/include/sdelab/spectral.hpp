#ifndef SDELAB_SPECTRAL_HPP
#define SDELAB_SPECTRAL_HPP

#include <complex>
#include <vector>

#include "sdelab/grid.hpp"

namespace sdelab {

/// 2-d real FFT workspace on an M x M periodic box of half-width L
/// (period 2L, wave numbers k_n = pi*n/L). Plans use FFTW_ESTIMATE so plan
/// selection, and therefore floating-point output, is reproducible.
class Spectral2D {
public:
    Spectral2D(int points, double half_width);
    ~Spectral2D();
    Spectral2D(const Spectral2D&) = delete;
    Spectral2D& operator=(const Spectral2D&) = delete;

    int points() const { return m_; }
    double half_width() const { return half_width_; }
    std::size_t spec_size() const { return static_cast<std::size_t>(m_) * (m_ / 2 + 1); }

    std::vector<std::complex<double>> forward(const std::vector<double>& real) const;
    std::vector<double> backward(std::vector<std::complex<double>> spec) const;  // normalized

    /// Wave vector of spectral entry (row j, half-column i).
    void wavevector(std::size_t idx, double& kx, double& ky) const;

    void apply_heat(std::vector<std::complex<double>>& spec, double dt) const;
    void apply_power(std::vector<std::complex<double>>& spec, double exponent) const;  // |k|^s, zero mode -> 0
    /// Zero all modes with |n_a| > points/3 (2/3-rule dealiasing).
    void dealias(std::vector<std::complex<double>>& spec) const;

    /// Velocity with vorticity rho under the Biot-Savart law; exactly
    /// divergence-free mode by mode, zero mean.
    void biot_savart(const std::vector<std::complex<double>>& rho_hat,
                     std::vector<std::complex<double>>& ux_hat,
                     std::vector<std::complex<double>>& uy_hat) const;

    std::vector<double> gradient_component(const std::vector<double>& field, int axis) const;

    /// Littlewood-Paley block: restrict to 2^j <= |k| < 2^(j+1).
    std::vector<double> dyadic_block(const std::vector<std::complex<double>>& spec, int j) const;
    int dyadic_min() const;
    int dyadic_max() const;

private:
    int m_;
    double half_width_;
    void* plan_fwd_;
    void* plan_bwd_;
    mutable std::vector<double> rbuf_;
    mutable std::vector<std::complex<double>> cbuf_;
};

/// Linear (non-periodic) convolution of two scalar fields on the same grid,
/// evaluated by zero-padded FFT; the result carries the cell measure so it
/// approximates the continuum integral f*g.
SampledField linear_convolution(const SampledField& f, const SampledField& g);

}  // namespace sdelab

#endif
