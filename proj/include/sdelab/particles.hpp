#ifndef SDELAB_PARTICLES_HPP
#define SDELAB_PARTICLES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sdelab/grid.hpp"
#include "sdelab/sde.hpp"

namespace sdelab::particles {

/// Pairwise interaction kernel of the particle system.
struct InteractionKernel {
    enum class Kind { none, biot_savart_blob } kind = Kind::biot_savart_blob;
    double eps = 0.05;  // blob scale

    Point eval(const Point& dx) const;
};

/// Default blob-scale coupling eps = c N^(-1/(d+2)).
double default_blob_scale(std::size_t n_particles, int dim, double c = 0.6);

/// N weighted particles approximating a measure-valued solution. Weights are
/// fixed for the whole run (no birth/death); their sum is conserved to the
/// bit by construction.
struct ParticleState {
    int dim = 2;
    double time = 0.0;
    double blob_scale = 0.05;
    std::vector<double> positions;  // N x dim, row major
    std::vector<double> weights;    // N signed

    std::size_t count() const { return weights.size(); }
    Point position(std::size_t i) const {
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) x[a] = positions[i * static_cast<std::size_t>(dim) + a];
        return x;
    }
    double weight_sum() const;
    void check_finite() const;
};

/// Samples N_+ particles from the positive part and N_- from the negative
/// part of zeta, counts proportional to the part masses; weights are
/// +/- (part mass) / (part count).
ParticleState init_particles(const MeasureSpec& zeta, std::size_t n, std::uint64_t seed,
                             double blob_scale = 0.0);

/// sum_j w_j K_eps(at - X_j), skipping exact zero displacements.
Point interaction_drift(const ParticleState& state, const InteractionKernel& kernel,
                        const Point& at);

/// Exact drift contribution to d/dt sum_i w_i X_i from the current snapshot;
/// zero for antisymmetric kernels up to rounding.
Point centroid_drift(const ParticleState& state, const InteractionKernel& kernel);

struct StepConfig {
    double dt = 0.01;
    std::uint64_t seed = 0;
    std::uint32_t stream = 3;
    /// optional uniform cell-list acceleration with a far-field cutoff;
    /// disabled by default (direct O(N^2) summation is the reference path)
    bool use_cell_list = false;
    double cutoff_radius = 0.0;
};

/// Synchronous Euler-Maruyama update: all drifts from the pre-step snapshot,
/// then independent sqrt(2 dt) noise per particle; weights unchanged.
/// Throws on non-finite positions (stability violation).
ParticleState step_particles(const ParticleState& state, const InteractionKernel& kernel,
                             const StepConfig& cfg, std::uint32_t step_index);

/// Density of the weighted empirical measure on a grid.
SampledField empirical_density(const ParticleState& state, const GridSpec& grid,
                               sde::DensityMethod method, double bandwidth = 0.0);

/// Direct-vs-cell-list consistency bound: |difference| of the drift at every
/// particle is at most |w|_tot * sup_{|x|>=cutoff} |K|.
double cell_list_error_bound(const ParticleState& state, const InteractionKernel& kernel,
                             double cutoff_radius);

void write_frames_bin(const std::string& path, const std::vector<ParticleState>& frames);

}  // namespace sdelab::particles

#endif
