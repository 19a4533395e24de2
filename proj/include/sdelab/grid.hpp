#ifndef SDELAB_GRID_HPP
#define SDELAB_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdelab {

using Point = std::array<double, 3>;  // coordinates beyond dim are ignored

/// Sample placement inside a cell. Cell-centered grids never place a sample
/// on a cell corner (so the origin of a singular field is never evaluated);
/// node-centered grids are the layout used by the spectral solver.
enum class Centering { cell, node };

struct GridSpec {
    int dim = 2;                 // 1, 2 or 3
    double half_width = 8.0;     // box is [-L, L)^dim
    int points = 256;            // samples per axis
    Centering centering = Centering::cell;

    double spacing() const { return 2.0 * half_width / points; }
    double cell_measure() const { return std::pow(spacing(), dim); }
    std::size_t size() const {
        std::size_t n = 1;
        for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points);
        return n;
    }
    double coord(int i) const {
        const double off = (centering == Centering::cell) ? 0.5 : 0.0;
        return -half_width + (i + off) * spacing();
    }
    Point point_at(std::size_t flat) const {
        Point x{0.0, 0.0, 0.0};
        for (int a = dim - 1; a >= 0; --a) {
            x[a] = coord(static_cast<int>(flat % points));
            flat /= points;
        }
        return x;
    }
    std::size_t flatten(const std::array<int, 3>& idx) const {
        std::size_t f = 0;
        for (int a = 0; a < dim; ++a) f = f * points + static_cast<std::size_t>(idx[a]);
        return f;
    }
    bool same_geometry(const GridSpec& o) const {
        return dim == o.dim && points == o.points && centering == o.centering &&
               std::abs(half_width - o.half_width) < 1e-12 * (1.0 + std::abs(half_width));
    }
};

/// Scalar or vector function sampled on a uniform box grid. Vector fields are
/// stored component-major. The grid's cell measure turns sample sums into
/// integrals, which is how every Lorentz/Lebesgue norm here is computed.
class SampledField {
public:
    SampledField() = default;
    SampledField(GridSpec grid, int components);

    static SampledField sample_scalar(const GridSpec& g,
                                      const std::function<double(const Point&)>& f);
    static SampledField sample_vector(const GridSpec& g, int components,
                                      const std::function<void(const Point&, double*)>& f);

    const GridSpec& grid() const { return grid_; }
    int components() const { return comps_; }
    std::size_t cells() const { return grid_.size(); }

    double& at(std::size_t flat, int comp = 0) { return values_[static_cast<std::size_t>(comp) * cells() + flat]; }
    double at(std::size_t flat, int comp = 0) const { return values_[static_cast<std::size_t>(comp) * cells() + flat]; }
    std::vector<double>& raw() { return values_; }
    const std::vector<double>& raw() const { return values_; }

    /// Pointwise magnitude; identity for scalar fields.
    SampledField magnitude() const;

    double integral(int comp = 0) const;
    double lp_norm(double p, int comp = 0) const;  // p = inf allowed
    double multilinear(const Point& x, int comp = 0) const;

    void check_finite(const std::string& where) const;

private:
    GridSpec grid_{};
    int comps_ = 1;
    std::vector<double> values_;
};

/// Integral of |a - b| over the box; both fields must share geometry.
double l1_distance(const SampledField& a, const SampledField& b);

/// Uniform snapshots of a scalar field on [t0, t1]; the carrier for mixed
/// space-time norms and for Krylov-functional integrands.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(double t0, double t1, std::vector<SampledField> frames);

    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    std::size_t frame_count() const { return frames_.size(); }
    double frame_dt() const { return (t1_ - t0_) / static_cast<double>(frames_.size() - 1); }
    double frame_time(std::size_t k) const { return t0_ + frame_dt() * static_cast<double>(k); }
    const SampledField& frame(std::size_t k) const { return frames_[k]; }

    std::size_t nearest_frame(double t) const;
    /// Bilinear in space, nearest frame in time; zero outside the box.
    double value(double t, const Point& x) const;

private:
    double t0_ = 0.0, t1_ = 1.0;
    std::vector<SampledField> frames_;
};

/// Initial measure for particle systems and SDE initial laws. Signed measures
/// split into a continuous part and an atomic part whose mass enters the
/// decay and contraction diagnostics.
struct MeasureSpec {
    struct Component {
        enum class Kind { point_mass, gaussian } kind = Kind::point_mass;
        Point center{0.0, 0.0, 0.0};
        double scale = 1.0;   // gaussian std per coordinate
        double mass = 1.0;    // signed
    };
    int dim = 2;
    std::vector<Component> parts;

    static MeasureSpec delta(int dim, const Point& x = {0, 0, 0}, double mass = 1.0);
    static MeasureSpec gaussian(int dim, const Point& center, double scale, double mass = 1.0);
    MeasureSpec& add_atom(const Point& x, double mass);
    MeasureSpec& add_gaussian(const Point& center, double scale, double mass);

    double total_mass() const;
    double total_variation() const;
    double atomic_mass() const;  // |zeta_a|, total variation of the atomic part

    /// Projection onto a grid; atoms become one-cell Gaussians.
    SampledField rasterize(const GridSpec& g) const;
};

}  // namespace sdelab

#endif
