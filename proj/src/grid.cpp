#include "sdelab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace sdelab {

SampledField::SampledField(GridSpec grid, int components)
    : grid_(grid), comps_(components), values_(grid.size() * static_cast<std::size_t>(components), 0.0) {
    if (grid.dim < 1 || grid.dim > 3) throw std::invalid_argument("SampledField: dim must be 1, 2 or 3");
    if (grid.points < 2) throw std::invalid_argument("SampledField: need at least 2 points per axis");
    if (components < 1) throw std::invalid_argument("SampledField: components >= 1");
}

SampledField SampledField::sample_scalar(const GridSpec& g, const std::function<double(const Point&)>& f) {
    SampledField out(g, 1);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) out.values_[i] = f(g.point_at(i));
    return out;
}

SampledField SampledField::sample_vector(const GridSpec& g, int components,
                                         const std::function<void(const Point&, double*)>& f) {
    SampledField out(g, components);
    const std::size_t n = g.size();
    std::vector<double> tmp(static_cast<std::size_t>(components));
    for (std::size_t i = 0; i < n; ++i) {
        f(g.point_at(i), tmp.data());
        for (int c = 0; c < components; ++c) out.at(i, c) = tmp[static_cast<std::size_t>(c)];
    }
    return out;
}

SampledField SampledField::magnitude() const {
    if (comps_ == 1) return *this;
    SampledField out(grid_, 1);
    const std::size_t n = cells();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < comps_; ++c) s += at(i, c) * at(i, c);
        out.at(i) = std::sqrt(s);
    }
    return out;
}

double SampledField::integral(int comp) const {
    double s = 0.0;
    const std::size_t n = cells();
    for (std::size_t i = 0; i < n; ++i) s += at(i, comp);
    return s * grid_.cell_measure();
}

double SampledField::lp_norm(double p, int comp) const {
    const std::size_t n = cells();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(at(i, comp)));
        return m;
    }
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(at(i, comp)), p);
    return std::pow(s * grid_.cell_measure(), 1.0 / p);
}

double SampledField::multilinear(const Point& x, int comp) const {
    const int d = grid_.dim;
    const double h = grid_.spacing();
    const double off = (grid_.centering == Centering::cell) ? 0.5 : 0.0;
    std::array<int, 3> i0{0, 0, 0};
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
        const double u = (x[a] + grid_.half_width) / h - off;
        double fl = std::floor(u);
        int i = static_cast<int>(fl);
        double frac = u - fl;
        if (i < 0) { i = 0; frac = 0.0; }
        if (i > grid_.points - 2) { i = grid_.points - 2; frac = 1.0; }
        // zero outside the sampled box
        if (u < -1.0 || u > grid_.points) return 0.0;
        i0[a] = i;
        w[a] = frac;
    }
    double acc = 0.0;
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        std::array<int, 3> idx = i0;
        double wt = 1.0;
        for (int a = 0; a < d; ++a) {
            const bool hi = (c >> a) & 1;
            idx[a] += hi ? 1 : 0;
            wt *= hi ? w[a] : (1.0 - w[a]);
        }
        acc += wt * at(grid_.flatten(idx), comp);
    }
    return acc;
}

void SampledField::check_finite(const std::string& where) const {
    for (double v : values_)
        if (!std::isfinite(v)) throw std::runtime_error(where + ": non-finite sample");
}

double l1_distance(const SampledField& a, const SampledField& b) {
    if (!a.grid().same_geometry(b.grid()) || a.components() != b.components())
        throw std::invalid_argument("l1_distance: mismatched field geometry");
    double s = 0.0;
    const std::size_t n = a.cells() * static_cast<std::size_t>(a.components());
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a.raw()[i] - b.raw()[i]);
    return s * a.grid().cell_measure();
}

SpaceTimeField::SpaceTimeField(double t0, double t1, std::vector<SampledField> frames)
    : t0_(t0), t1_(t1), frames_(std::move(frames)) {
    if (frames_.size() < 2) throw std::invalid_argument("SpaceTimeField: need at least 2 frames");
    if (!(t1_ > t0_)) throw std::invalid_argument("SpaceTimeField: time grid not increasing");
    for (const auto& f : frames_)
        if (!f.grid().same_geometry(frames_.front().grid()))
            throw std::invalid_argument("SpaceTimeField: frames with mismatched geometry");
}

std::size_t SpaceTimeField::nearest_frame(double t) const {
    const double u = (t - t0_) / frame_dt();
    long k = std::lround(u);
    if (k < 0) k = 0;
    if (k >= static_cast<long>(frames_.size())) k = static_cast<long>(frames_.size()) - 1;
    return static_cast<std::size_t>(k);
}

double SpaceTimeField::value(double t, const Point& x) const {
    return frames_[nearest_frame(t)].multilinear(x);
}

MeasureSpec MeasureSpec::delta(int dim, const Point& x, double mass) {
    MeasureSpec m;
    m.dim = dim;
    m.add_atom(x, mass);
    return m;
}

MeasureSpec MeasureSpec::gaussian(int dim, const Point& center, double scale, double mass) {
    MeasureSpec m;
    m.dim = dim;
    m.add_gaussian(center, scale, mass);
    return m;
}

MeasureSpec& MeasureSpec::add_atom(const Point& x, double mass) {
    parts.push_back({Component::Kind::point_mass, x, 0.0, mass});
    return *this;
}

MeasureSpec& MeasureSpec::add_gaussian(const Point& center, double scale, double mass) {
    if (!(scale > 0.0)) throw std::invalid_argument("MeasureSpec: gaussian scale must be positive");
    parts.push_back({Component::Kind::gaussian, center, scale, mass});
    return *this;
}

double MeasureSpec::total_mass() const {
    double s = 0.0;
    for (const auto& p : parts) s += p.mass;
    return s;
}

double MeasureSpec::total_variation() const {
    double s = 0.0;
    for (const auto& p : parts) s += std::abs(p.mass);
    return s;
}

double MeasureSpec::atomic_mass() const {
    double s = 0.0;
    for (const auto& p : parts)
        if (p.kind == Component::Kind::point_mass) s += std::abs(p.mass);
    return s;
}

SampledField MeasureSpec::rasterize(const GridSpec& g) const {
    if (g.dim != dim) throw std::invalid_argument("MeasureSpec::rasterize: dimension mismatch");
    SampledField out(g, 1);
    const std::size_t n = g.size();
    const double h = g.spacing();
    for (const auto& p : parts) {
        const double sigma = (p.kind == Component::Kind::point_mass) ? h : p.scale;
        // normalized per-axis Gaussian; atoms use a one-cell width
        double sum = 0.0;
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Point x = g.point_at(i);
            double e = 0.0;
            for (int a = 0; a < dim; ++a) {
                const double dx = x[a] - p.center[a];
                e += dx * dx;
            }
            vals[i] = std::exp(-e / (2.0 * sigma * sigma));
            sum += vals[i];
        }
        const double norm = p.mass / (sum * g.cell_measure());
        for (std::size_t i = 0; i < n; ++i) out.at(i) += vals[i] * norm;
    }
    return out;
}

}  // namespace sdelab
