#include "sdelab/particles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sdelab/kernels.hpp"
#include "sdelab/rng.hpp"

namespace sdelab::particles {

Point InteractionKernel::eval(const Point& dx) const {
    switch (kind) {
        case Kind::none:
            return {0.0, 0.0, 0.0};
        case Kind::biot_savart_blob: {
            const double den = dx[0] * dx[0] + dx[1] * dx[1] + eps * eps;
            if (den == 0.0) return {0.0, 0.0, 0.0};
            const double c = 1.0 / (2.0 * M_PI * den);
            return {-dx[1] * c, dx[0] * c, 0.0};
        }
    }
    return {0.0, 0.0, 0.0};
}

double default_blob_scale(std::size_t n_particles, int dim, double c) {
    return c * std::pow(static_cast<double>(n_particles), -1.0 / (dim + 2));
}

double ParticleState::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

void ParticleState::check_finite() const {
    for (double v : positions)
        if (!std::isfinite(v))
            throw std::runtime_error("particles: non-finite position (stability violation)");
}

ParticleState init_particles(const MeasureSpec& zeta, std::size_t n, std::uint64_t seed,
                             double blob_scale) {
    if (n < 1) throw std::invalid_argument("init_particles: N >= 1");
    double pos_mass = 0.0, neg_mass = 0.0;
    for (const auto& p : zeta.parts) (p.mass >= 0.0 ? pos_mass : neg_mass) += std::abs(p.mass);
    const double tv = pos_mass + neg_mass;
    if (tv <= 0.0) throw std::invalid_argument("init_particles: zero total variation");

    std::size_t n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * pos_mass / tv));
    if (pos_mass > 0.0 && n_pos == 0) n_pos = 1;
    if (neg_mass == 0.0) n_pos = n;
    const std::size_t n_neg = n - n_pos;
    if (neg_mass > 0.0 && n_neg == 0)
        throw std::invalid_argument("init_particles: N too small to carry the negative part");

    ParticleState st;
    st.dim = zeta.dim;
    st.blob_scale = (blob_scale > 0.0) ? blob_scale : default_blob_scale(n, zeta.dim);
    st.positions.assign(n * static_cast<std::size_t>(zeta.dim), 0.0);
    st.weights.assign(n, 0.0);

    // sample each signed part independently, proportional to |mass|
    auto fill = [&](bool positive, std::size_t offset, std::size_t count, double part_mass) {
        if (count == 0) return;
        const double w = (positive ? 1.0 : -1.0) * part_mass / static_cast<double>(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t idx = offset + i;
            ScalarRng rng(seed, positive ? 5 : 6, static_cast<std::uint32_t>(i));
            // pick a component of the right sign by cumulative |mass|
            double u = rng.uniform() * part_mass;
            const MeasureSpec::Component* comp = nullptr;
            for (const auto& c : zeta.parts) {
                if ((c.mass >= 0.0) != positive) continue;
                u -= std::abs(c.mass);
                comp = &c;
                if (u <= 0.0) break;
            }
            Point x = comp->center;
            if (comp->kind == MeasureSpec::Component::Kind::gaussian)
                for (int a = 0; a < zeta.dim; ++a) x[a] += comp->scale * rng.normal();
            for (int a = 0; a < zeta.dim; ++a)
                st.positions[idx * static_cast<std::size_t>(zeta.dim) + a] = x[a];
            st.weights[idx] = w;
        }
    };
    fill(true, 0, n_pos, pos_mass);
    fill(false, n_pos, n_neg, neg_mass);
    return st;
}

namespace {

Point direct_drift(const ParticleState& st, const InteractionKernel& kernel, const Point& at,
                   std::size_t skip = static_cast<std::size_t>(-1)) {
    Point acc{0.0, 0.0, 0.0};
    const std::size_t n = st.count();
    for (std::size_t j = 0; j < n; ++j) {
        if (j == skip) continue;
        Point dx = at;
        bool zero = true;
        for (int a = 0; a < st.dim; ++a) {
            dx[a] -= st.positions[j * static_cast<std::size_t>(st.dim) + a];
            zero = zero && dx[a] == 0.0;
        }
        if (zero) continue;  // K_eps(0) = 0 for antisymmetric kernels anyway
        const Point k = kernel.eval(dx);
        for (int a = 0; a < st.dim; ++a) acc[a] += st.weights[j] * k[a];
    }
    return acc;
}

struct CellList {
    double cell = 1.0;
    double x0 = 0.0, y0 = 0.0;
    int nx = 1, ny = 1;
    std::vector<std::vector<std::uint32_t>> bins;

    CellList(const ParticleState& st, double cutoff) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (std::size_t i = 0; i < st.count(); ++i) {
            const Point x = st.position(i);
            xmin = std::min(xmin, x[0]);
            xmax = std::max(xmax, x[0]);
            ymin = std::min(ymin, x[1]);
            ymax = std::max(ymax, x[1]);
        }
        cell = cutoff;
        x0 = xmin;
        y0 = ymin;
        nx = std::max(1, static_cast<int>((xmax - xmin) / cell) + 1);
        ny = std::max(1, static_cast<int>((ymax - ymin) / cell) + 1);
        bins.resize(static_cast<std::size_t>(nx) * ny);
        for (std::size_t i = 0; i < st.count(); ++i)
            bins[index(st.position(i))].push_back(static_cast<std::uint32_t>(i));
    }
    std::size_t index(const Point& x) const {
        const int ix = std::clamp(static_cast<int>((x[0] - x0) / cell), 0, nx - 1);
        const int iy = std::clamp(static_cast<int>((x[1] - y0) / cell), 0, ny - 1);
        return static_cast<std::size_t>(ix) * ny + iy;
    }
    Point drift(const ParticleState& st, const InteractionKernel& kernel, const Point& at,
                std::size_t skip) const {
        Point acc{0.0, 0.0, 0.0};
        const int cx = std::clamp(static_cast<int>((at[0] - x0) / cell), 0, nx - 1);
        const int cy = std::clamp(static_cast<int>((at[1] - y0) / cell), 0, ny - 1);
        for (int ix = std::max(0, cx - 1); ix <= std::min(nx - 1, cx + 1); ++ix)
            for (int iy = std::max(0, cy - 1); iy <= std::min(ny - 1, cy + 1); ++iy)
                for (std::uint32_t j : bins[static_cast<std::size_t>(ix) * ny + iy]) {
                    if (j == skip) continue;
                    Point dx = at;
                    bool zero = true;
                    for (int a = 0; a < st.dim; ++a) {
                        dx[a] -= st.positions[j * static_cast<std::size_t>(st.dim) + a];
                        zero = zero && dx[a] == 0.0;
                    }
                    if (zero) continue;
                    if (dx[0] * dx[0] + dx[1] * dx[1] > cell * cell) continue;
                    const Point k = kernel.eval(dx);
                    for (int a = 0; a < st.dim; ++a) acc[a] += st.weights[j] * k[a];
                }
        return acc;
    }
};

}  // namespace

Point interaction_drift(const ParticleState& state, const InteractionKernel& kernel,
                        const Point& at) {
    return direct_drift(state, kernel, at);
}

Point centroid_drift(const ParticleState& state, const InteractionKernel& kernel) {
    Point acc{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < state.count(); ++i) {
        const Point di = direct_drift(state, kernel, state.position(i), i);
        for (int a = 0; a < state.dim; ++a) acc[a] += state.weights[i] * di[a];
    }
    return acc;
}

ParticleState step_particles(const ParticleState& state, const InteractionKernel& kernel,
                             const StepConfig& cfg, std::uint32_t step_index) {
    const std::size_t n = state.count();
    ParticleState out = state;
    out.time = state.time + cfg.dt;

    std::vector<double> drifts(n * static_cast<std::size_t>(state.dim));
    if (cfg.use_cell_list && cfg.cutoff_radius > 0.0) {
        const CellList cl(state, cfg.cutoff_radius);
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            const Point di = cl.drift(state, kernel, state.position(static_cast<std::size_t>(i)),
                                      static_cast<std::size_t>(i));
            for (int a = 0; a < state.dim; ++a)
                drifts[static_cast<std::size_t>(i) * state.dim + a] = di[a];
        }
    } else {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            const Point di = direct_drift(state, kernel, state.position(static_cast<std::size_t>(i)),
                                          static_cast<std::size_t>(i));
            for (int a = 0; a < state.dim; ++a)
                drifts[static_cast<std::size_t>(i) * state.dim + a] = di[a];
        }
    }

    const double root = sde::kNoiseScale * std::sqrt(cfg.dt);
    for (std::size_t i = 0; i < n; ++i) {
        const CounterRng rng(cfg.seed, cfg.stream, static_cast<std::uint32_t>(i));
        for (int a = 0; a < state.dim; ++a) {
            const double xi = rng.normal(step_index, 0, static_cast<std::uint32_t>(a));
            out.positions[i * static_cast<std::size_t>(state.dim) + a] +=
                drifts[i * static_cast<std::size_t>(state.dim) + a] * cfg.dt + root * xi;
        }
    }
    out.check_finite();
    return out;
}

SampledField empirical_density(const ParticleState& state, const GridSpec& grid,
                               sde::DensityMethod method, double bandwidth) {
    if (grid.dim != state.dim) throw std::invalid_argument("empirical_density: dimension mismatch");
    SampledField out(grid, 1);
    const double h = grid.spacing();
    const double cell = grid.cell_measure();
    const double off = (grid.centering == Centering::cell) ? 0.5 : 0.0;
    const double bw = std::max(bandwidth, 0.5 * h);
    if (method == sde::DensityMethod::histogram) {
        for (std::size_t i = 0; i < state.count(); ++i) {
            const Point x = state.position(i);
            std::array<int, 3> idx{0, 0, 0};
            for (int a = 0; a < state.dim; ++a) {
                const int k = static_cast<int>(std::floor((x[a] + grid.half_width) / h - off + 0.5));
                idx[a] = std::clamp(k, 0, grid.points - 1);
            }
            out.at(grid.flatten(idx)) += state.weights[i] / cell;
        }
        return out;
    }
    for (std::size_t i = 0; i < state.count(); ++i) {
        const Point x = state.position(i);
        const double rad = 4.0 * bw;
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int a = 0; a < state.dim; ++a) {
            lo[a] = std::clamp(static_cast<int>(std::floor((x[a] - rad + grid.half_width) / h - off)),
                               0, grid.points - 1);
            hi[a] = std::clamp(static_cast<int>(std::ceil((x[a] + rad + grid.half_width) / h - off)),
                               0, grid.points - 1);
        }
        std::vector<std::pair<std::size_t, double>> patch;
        double tot = 0.0;
        std::array<int, 3> idx = lo;
        while (true) {
            double r2 = 0.0;
            for (int a = 0; a < state.dim; ++a) {
                const double xa = -grid.half_width + (idx[a] + off) * h;
                r2 += (xa - x[a]) * (xa - x[a]);
            }
            const double w = std::exp(-r2 / (2.0 * bw * bw));
            if (w > 0.0) {
                patch.emplace_back(grid.flatten(idx), w);
                tot += w;
            }
            int a = state.dim - 1;
            while (a >= 0) {
                if (++idx[a] <= hi[a]) break;
                idx[a] = lo[a];
                --a;
            }
            if (a < 0) break;
        }
        if (tot > 0.0)
            for (const auto& [flat, w] : patch) out.at(flat) += state.weights[i] * w / (tot * cell);
    }
    return out;
}

double cell_list_error_bound(const ParticleState& state, const InteractionKernel& kernel,
                             double cutoff_radius) {
    double wtot = 0.0;
    for (double w : state.weights) wtot += std::abs(w);
    // |K_eps| <= 1 / (2 pi |x|) beyond the cutoff
    (void)kernel;
    return wtot / (2.0 * M_PI * cutoff_radius);
}

void write_frames_bin(const std::string& path, const std::vector<ParticleState>& frames) {
    if (frames.empty()) throw std::invalid_argument("write_frames_bin: no frames");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_frames_bin: cannot open " + path);
    const char magic[4] = {'P', 'T', 'C', '1'};
    f.write(magic, 4);
    const std::uint32_t d = static_cast<std::uint32_t>(frames[0].dim);
    const std::uint64_t n = frames[0].count();
    const double dt = frames.size() > 1 ? frames[1].time - frames[0].time : 0.0;
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(&n), 8);
    f.write(reinterpret_cast<const char*>(&dt), 8);
    for (const auto& fr : frames) {
        f.write(reinterpret_cast<const char*>(fr.positions.data()),
                static_cast<std::streamsize>(fr.positions.size() * sizeof(double)));
        f.write(reinterpret_cast<const char*>(fr.weights.data()),
                static_cast<std::streamsize>(fr.weights.size() * sizeof(double)));
    }
}

}  // namespace sdelab::particles
