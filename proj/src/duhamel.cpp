#include "sdelab/duhamel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace sdelab::fpe {

namespace {

using Spectrum = std::vector<std::complex<double>>;

// spectral F[(K * rho) rho] components, dealiased
void nonlinear_flux(const Spectral2D& sp, ConvolutionKernel kernel, const Spectrum& rho_hat,
                    Spectrum& fx, Spectrum& fy) {
    if (kernel == ConvolutionKernel::none) {
        fx.assign(sp.spec_size(), {0.0, 0.0});
        fy.assign(sp.spec_size(), {0.0, 0.0});
        return;
    }
    Spectrum uxh, uyh;
    sp.biot_savart(rho_hat, uxh, uyh);
    const auto rho = sp.backward(rho_hat);
    const auto ux = sp.backward(std::move(uxh));
    const auto uy = sp.backward(std::move(uyh));
    std::vector<double> px(rho.size()), py(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        px[i] = ux[i] * rho[i];
        py[i] = uy[i] * rho[i];
    }
    fx = sp.forward(px);
    fy = sp.forward(py);
    sp.dealias(fx);
    sp.dealias(fy);
}

}  // namespace

double weighted_norm(const std::vector<double>& times, const std::vector<SampledField>& fields,
                     double r) {
    const double rp = r / (r - 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= 0.0) continue;
        worst = std::max(worst, std::pow(times[i], 1.0 / rp) * fields[i].lp_norm(r));
    }
    return worst;
}

double DuhamelResult::contraction_ratio() const {
    // representative late-stage ratio: median of the ratios recorded while
    // the distances were still meaningfully above roundoff
    std::vector<double> usable;
    for (std::size_t k = 0; k < contraction_ratios.size(); ++k)
        if (distances[k] > 1e-13) usable.push_back(contraction_ratios[k]);
    if (usable.empty()) return 0.0;
    std::sort(usable.begin(), usable.end());
    return usable[usable.size() / 2];
}

DuhamelResult duhamel_picard(ConvolutionKernel kernel, const MeasureSpec& zeta,
                             const DuhamelConfig& cfg) {
    cfg.grid.validate();
    if (!(cfg.r > 1.0 && cfg.r < 2.0))
        throw std::invalid_argument("duhamel_picard: r must lie in (1, d') = (1, 2)");
    if (cfg.time_nodes < 4) throw std::invalid_argument("duhamel_picard: need >= 4 time nodes");

    const GridSpec g = cfg.grid.spec();
    const Spectral2D sp(g.points, g.half_width);
    const int nt = cfg.time_nodes;
    const double dt = cfg.t0 / static_cast<double>(nt);

    DuhamelResult out;
    out.times.resize(static_cast<std::size_t>(nt) + 1);
    for (int i = 0; i <= nt; ++i) out.times[static_cast<std::size_t>(i)] = dt * i;

    const SampledField zeta_field = zeta.rasterize(g);
    const Spectrum zeta_hat = sp.forward(zeta_field.raw());

    // free evolution h(t) * zeta on the nodes
    std::vector<Spectrum> free_evo(static_cast<std::size_t>(nt) + 1, zeta_hat);
    for (int i = 0; i <= nt; ++i) sp.apply_heat(free_evo[static_cast<std::size_t>(i)], out.times[i]);

    auto to_fields = [&](const std::vector<Spectrum>& spectra) {
        std::vector<SampledField> fields;
        fields.reserve(spectra.size());
        for (const auto& s : spectra) {
            SampledField f(g, 1);
            f.raw() = sp.backward(s);
            fields.push_back(std::move(f));
        }
        return fields;
    };

    std::vector<Spectrum> current = free_evo;
    int grow_streak = 0;
    double prev_distance = -1.0;

    for (int it = 0; it < cfg.iterations; ++it) {
        // flux spectra of the current iterate on the nodes
        std::vector<Spectrum> fx(static_cast<std::size_t>(nt) + 1), fy(static_cast<std::size_t>(nt) + 1);
        for (int i = 0; i <= nt; ++i)
            nonlinear_flux(sp, kernel, current[static_cast<std::size_t>(i)],
                           fx[static_cast<std::size_t>(i)], fy[static_cast<std::size_t>(i)]);

        std::vector<Spectrum> next(static_cast<std::size_t>(nt) + 1);
        next[0] = free_evo[0];
        const std::complex<double> I(0.0, 1.0);
        for (int m = 1; m <= nt; ++m) {
            Spectrum acc = free_evo[static_cast<std::size_t>(m)];
            // midpoint rule on [0, t - dt]; integrand values at the midpoints
            // from averaged node spectra
            for (int j = 0; j + 1 < m; ++j) {
                const double smid = dt * (j + 0.5);
                const double tau = out.times[static_cast<std::size_t>(m)] - smid;
                for (std::size_t idx = 0; idx < acc.size(); ++idx) {
                    double kx, ky;
                    sp.wavevector(idx, kx, ky);
                    const auto fmx =
                        0.5 * (fx[static_cast<std::size_t>(j)][idx] + fx[static_cast<std::size_t>(j) + 1][idx]);
                    const auto fmy =
                        0.5 * (fy[static_cast<std::size_t>(j)][idx] + fy[static_cast<std::size_t>(j) + 1][idx]);
                    acc[idx] -= dt * std::exp(-(kx * kx + ky * ky) * tau) * I * (kx * fmx + ky * fmy);
                }
            }
            // last subinterval [t - dt, t]: exact integral of the heat factor
            // against the integrand frozen at the endpoint node
            for (std::size_t idx = 0; idx < acc.size(); ++idx) {
                double kx, ky;
                sp.wavevector(idx, kx, ky);
                const double k2 = kx * kx + ky * ky;
                const double w = (k2 == 0.0) ? dt : (1.0 - std::exp(-k2 * dt)) / k2;
                acc[idx] -= w * I *
                            (kx * fx[static_cast<std::size_t>(m)][idx] +
                             ky * fy[static_cast<std::size_t>(m)][idx]);
            }
            next[static_cast<std::size_t>(m)] = std::move(acc);
        }

        // weighted-norm distance between the iterates
        std::vector<Spectrum> diff(static_cast<std::size_t>(nt) + 1);
        for (int i = 0; i <= nt; ++i) {
            diff[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i)];
            for (std::size_t idx = 0; idx < diff[static_cast<std::size_t>(i)].size(); ++idx)
                diff[static_cast<std::size_t>(i)][idx] -= current[static_cast<std::size_t>(i)][idx];
        }
        const double dist = weighted_norm(out.times, to_fields(diff), cfg.r);
        if (!out.distances.empty() && out.distances.back() > 0.0)
            out.contraction_ratios.push_back(dist / out.distances.back());
        out.distances.push_back(dist);
        if (prev_distance >= 0.0 && dist > prev_distance) {
            if (++grow_streak >= 3) out.diverged = true;  // reported, not raised
        } else {
            grow_streak = 0;
        }
        prev_distance = dist;
        current = std::move(next);
    }

    out.fixed_point = to_fields(current);
    return out;
}

std::vector<DecayRow> decay_diagnostic(const MeasureSpec& zeta, double r,
                                       const std::vector<double>& t_grid,
                                       const PeriodicGrid& grid) {
    if (!(r > 1.0)) throw std::invalid_argument("decay_diagnostic: r > 1");
    grid.validate();
    const GridSpec g = grid.spec();
    const Spectral2D sp(g.points, g.half_width);
    const SampledField zf = zeta.rasterize(g);
    const Spectrum zh = sp.forward(zf.raw());
    const double rp = r / (r - 1.0);

    std::vector<DecayRow> rows;
    for (double t : t_grid) {
        Spectrum s = zh;
        sp.apply_heat(s, t);
        SampledField f(g, 1);
        f.raw() = sp.backward(std::move(s));
        rows.push_back({t, std::pow(t, 1.0 / rp) * f.lp_norm(r)});
    }
    return rows;
}

}  // namespace sdelab::fpe
