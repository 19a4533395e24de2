#include "sdelab/drift.hpp"

#include <algorithm>
#include <cmath>

#include "sdelab/rng.hpp"
#include "sdelab/spectral.hpp"

namespace sdelab::drift {

namespace {

class ZeroDrift final : public DriftField {
public:
    explicit ZeroDrift(int d) : d_(d) {}
    int dim() const override { return d_; }
    Point eval(double, const Point&) const override { return {0.0, 0.0, 0.0}; }
    bool divergence_free() const override { return true; }
    double sup_bound() const override { return 0.0; }
    std::string describe() const override { return "zero"; }

private:
    int d_;
};

class ConstantDrift final : public DriftField {
public:
    ConstantDrift(int d, const Point& c) : d_(d), c_(c) {}
    int dim() const override { return d_; }
    Point eval(double, const Point&) const override { return c_; }
    bool divergence_free() const override { return true; }
    double sup_bound() const override {
        double s = 0.0;
        for (int a = 0; a < d_; ++a) s += c_[a] * c_[a];
        return std::sqrt(s);
    }
    std::string describe() const override { return "constant"; }

private:
    int d_;
    Point c_;
};

class BiotSavartDrift final : public DriftField {
public:
    explicit BiotSavartDrift(double eps) : eps_(eps) {}
    int dim() const override { return 2; }
    Point eval(double, const Point& x) const override {
        if (eps_ == 0.0 && x[0] == 0.0 && x[1] == 0.0)
            throw SingularPointError("biot_savart: singular point x = 0");
        const auto u = kernels::biot_savart_blob({x[0], x[1]}, eps_);
        return {u[0], u[1], 0.0};
    }
    bool divergence_free() const override { return true; }
    double sup_bound() const override {
        if (eps_ == 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / (4.0 * M_PI * eps_);  // max |K_eps| at |x| = eps
    }
    std::vector<Point> singular_points() const override {
        if (eps_ == 0.0) return {Point{0.0, 0.0, 0.0}};
        return {};
    }
    std::string describe() const override { return "biot_savart"; }

private:
    double eps_;
};

class SupercriticalDrift final : public DriftField {
public:
    explicit SupercriticalDrift(const kernels::SupercriticalSpec& spec) : spec_(spec) {
        spec_.validate();
        sup_ = spec_.sup_bound();
    }
    int dim() const override { return spec_.d; }
    Point eval(double, const Point& x) const override {
        try {
            return kernels::supercritical_drift(x, spec_);
        } catch (const std::domain_error& e) {
            throw SingularPointError(e.what());
        }
    }
    bool divergence_free() const override { return true; }
    double sup_bound() const override { return sup_; }
    std::vector<Point> singular_points() const override {
        if (spec_.epsilon == 0.0) return {Point{0.0, 0.0, 0.0}};
        return {};
    }
    std::string describe() const override { return "supercritical"; }
    const kernels::SupercriticalSpec& spec() const { return spec_; }

private:
    kernels::SupercriticalSpec spec_;
    double sup_;
};

class CustomDrift final : public DriftField {
public:
    CustomDrift(int d, std::function<Point(double, const Point&)> f, bool divfree, double sup,
                std::string name)
        : d_(d), f_(std::move(f)), divfree_(divfree), sup_(sup), name_(std::move(name)) {}
    int dim() const override { return d_; }
    Point eval(double t, const Point& x) const override { return f_(t, x); }
    bool divergence_free() const override { return divfree_; }
    double sup_bound() const override { return sup_; }
    std::string describe() const override { return name_; }

private:
    int d_;
    std::function<Point(double, const Point&)> f_;
    bool divfree_;
    double sup_;
    std::string name_;
};

class TableDrift2D final : public DriftField {
public:
    TableDrift2D(SampledField table, bool divfree, std::string name)
        : table_(std::move(table)), divfree_(divfree), name_(std::move(name)) {
        if (table_.grid().dim != 2 || table_.components() != 2)
            throw std::invalid_argument("table_drift: need a 2-component 2-d field");
        sup_ = 0.0;
        for (std::size_t i = 0; i < table_.cells(); ++i) {
            const double ux = table_.at(i, 0), uy = table_.at(i, 1);
            sup_ = std::max(sup_, std::sqrt(ux * ux + uy * uy));
        }
    }
    int dim() const override { return 2; }
    Point eval(double, const Point& x) const override {
        return {table_.multilinear(x, 0), table_.multilinear(x, 1), 0.0};
    }
    bool divergence_free() const override { return divfree_; }
    double sup_bound() const override { return sup_; }
    std::string describe() const override { return name_; }
    const SampledField& table() const { return table_; }

private:
    SampledField table_;
    bool divfree_;
    double sup_;
    std::string name_;
};

class FramesDrift final : public DriftField {
public:
    FramesDrift(std::vector<double> times, std::vector<SampledField> tables, bool divfree,
                std::string name)
        : times_(std::move(times)), tables_(std::move(tables)), divfree_(divfree),
          name_(std::move(name)) {
        if (times_.size() != tables_.size() || times_.empty())
            throw std::invalid_argument("frozen_frames_drift: one table per time node");
        sup_ = 0.0;
        for (const auto& t : tables_) {
            if (t.grid().dim != 2 || t.components() != 2)
                throw std::invalid_argument("frozen_frames_drift: 2-component 2-d tables");
            for (std::size_t i = 0; i < t.cells(); ++i)
                sup_ = std::max(sup_, std::hypot(t.at(i, 0), t.at(i, 1)));
        }
    }
    int dim() const override { return 2; }
    Point eval(double t, const Point& x) const override {
        std::size_t best = 0;
        double dist = std::abs(times_[0] - t);
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (std::abs(times_[i] - t) < dist) {
                dist = std::abs(times_[i] - t);
                best = i;
            }
        return {tables_[best].multilinear(x, 0), tables_[best].multilinear(x, 1), 0.0};
    }
    bool divergence_free() const override { return divfree_; }
    double sup_bound() const override { return sup_; }
    std::string describe() const override { return name_; }

private:
    std::vector<double> times_;
    std::vector<SampledField> tables_;
    bool divfree_;
    double sup_;
    std::string name_;
};

// the standard even C^inf bump exp(-1/(1-|u|^2)) on |u| < 1
double std_bump(double r2) {
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2));
}

// d = 3 (or generic) on-demand mollification by quadrature over the bump
// stencil at scale 1/n; weights normalized to unit mass so constants pass
// through exactly.
class QuadratureMollifiedDrift final : public DriftField {
public:
    QuadratureMollifiedDrift(DriftPtr base, int level) : base_(std::move(base)), level_(level) {
        const int k = 4;  // (2k+1)^d stencil
        const double h = 1.0 / (level_ * k);
        const int d = base_->dim();
        const int n1 = 2 * k + 1;
        const int total = (d == 3) ? n1 * n1 * n1 : n1 * n1;
        double wsum = 0.0;
        for (int i = 0; i < total; ++i) {
            int rem = i;
            Point y{0.0, 0.0, 0.0};
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const int ia = rem % n1;
                rem /= n1;
                y[a] = (ia - k) * h;
                r2 += y[a] * y[a] * (level_ * level_);
            }
            const double w = std_bump(r2);
            if (w > 0.0) {
                offsets_.push_back(y);
                weights_.push_back(w);
                wsum += w;
            }
        }
        for (double& w : weights_) w /= wsum;
    }
    int dim() const override { return base_->dim(); }
    Point eval(double t, const Point& x) const override {
        Point acc{0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < offsets_.size(); ++j) {
            Point y = x;
            for (int a = 0; a < dim(); ++a) y[a] -= offsets_[j][a];
            Point v{0.0, 0.0, 0.0};
            try {
                v = base_->eval(t, y);
            } catch (const SingularPointError&) {
                continue;  // measure-zero node of the stencil
            }
            for (int a = 0; a < dim(); ++a) acc[a] += weights_[j] * v[a];
        }
        return acc;
    }
    bool divergence_free() const override { return base_->divergence_free(); }
    double sup_bound() const override { return base_->sup_bound(); }
    std::string describe() const override {
        return "mollified(" + base_->describe() + ", n=" + std::to_string(level_) + ")";
    }

private:
    DriftPtr base_;
    int level_;
    std::vector<Point> offsets_;
    std::vector<double> weights_;
};

SampledField bump_field(const GridSpec& g, int level) {
    auto rho = SampledField::sample_scalar(g, [&](const Point& x) {
        const double r2 = (x[0] * x[0] + x[1] * x[1]) * (level * level);
        return std_bump(r2);
    });
    double mass = rho.integral();
    for (double& v : rho.raw()) v /= mass;
    return rho;
}

}  // namespace

DriftPtr zero_drift(int d) { return std::make_shared<ZeroDrift>(d); }

DriftPtr constant_drift(int d, const Point& c) { return std::make_shared<ConstantDrift>(d, c); }

DriftPtr biot_savart_drift(double eps) { return std::make_shared<BiotSavartDrift>(eps); }

DriftPtr supercritical_drift_field(const kernels::SupercriticalSpec& spec) {
    return std::make_shared<SupercriticalDrift>(spec);
}

DriftPtr custom_drift(int d, std::function<Point(double, const Point&)> f, bool divergence_free,
                      double sup_bound, std::string name) {
    return std::make_shared<CustomDrift>(d, std::move(f), divergence_free, sup_bound,
                                         std::move(name));
}

DriftPtr table_drift(SampledField velocity2, bool divergence_free, std::string name) {
    return std::make_shared<TableDrift2D>(std::move(velocity2), divergence_free, std::move(name));
}

DriftPtr frozen_frames_drift(std::vector<double> times, std::vector<SampledField> velocities,
                             bool divergence_free, std::string name) {
    return std::make_shared<FramesDrift>(std::move(times), std::move(velocities), divergence_free,
                                         std::move(name));
}

DriftPtr blob_velocity_drift(const MeasureSpec& vorticity, const GridSpec& table, double eps) {
    if (table.dim != 2) throw std::invalid_argument("blob_velocity_drift: 2-d only");
    GridSpec g = table;
    g.centering = Centering::node;
    const SampledField rho = vorticity.rasterize(g);
    // sample the blob kernel with the odd-kernel cell average (= 0) at x = 0
    SampledField kx(g, 1), ky(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point_at(i);
        if (x[0] == 0.0 && x[1] == 0.0 && eps == 0.0) continue;
        const auto u = kernels::biot_savart_blob({x[0], x[1]}, eps);
        kx.at(i) = u[0];
        ky.at(i) = u[1];
    }
    const SampledField ux = linear_convolution(kx, rho);
    const SampledField uy = linear_convolution(ky, rho);
    SampledField vel(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        vel.at(i, 0) = ux.at(i);
        vel.at(i, 1) = uy.at(i);
    }
    return table_drift(std::move(vel), true, "blob_velocity");
}

DriftPtr mollify_drift(const DriftPtr& base, int level, const GridSpec& table) {
    if (level < 1) throw std::invalid_argument("mollify_drift: level >= 1");
    if (base->dim() != 2) return std::make_shared<QuadratureMollifiedDrift>(base, level);

    GridSpec g = table;
    g.centering = Centering::node;
    if (g.spacing() > 0.5 / level)
        throw std::invalid_argument("mollify_drift: grid does not resolve the mollification stencil");
    const SampledField rho = bump_field(g, level);

    // sample each component; odd kernels get the zero cell average at their
    // singular point, other singular points are skipped the same way
    SampledField bx(g, 1), by(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point_at(i);
        Point v{0.0, 0.0, 0.0};
        try {
            v = base->eval(0.0, x);
        } catch (const SingularPointError&) {
            v = {0.0, 0.0, 0.0};
        }
        bx.at(i) = v[0];
        by.at(i) = v[1];
    }
    const SampledField cx = linear_convolution(bx, rho);
    const SampledField cy = linear_convolution(by, rho);
    SampledField vel(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        vel.at(i, 0) = cx.at(i);
        vel.at(i, 1) = cy.at(i);
    }
    return table_drift(std::move(vel), base->divergence_free(),
                       "mollified(" + base->describe() + ", n=" + std::to_string(level) + ")");
}

SampledField sample_drift(const DriftField& b, const GridSpec& g, double t) {
    if (g.dim != b.dim()) throw std::invalid_argument("sample_drift: dimension mismatch");
    SampledField out(g, b.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point v{0.0, 0.0, 0.0};
        try {
            v = b.eval(t, g.point_at(i));
        } catch (const SingularPointError&) {
            v = {0.0, 0.0, 0.0};
        }
        for (int c = 0; c < b.dim(); ++c) out.at(i, c) = v[c];
    }
    return out;
}

DivergenceReport divergence_check(const DriftField& b, const GridSpec& region,
                                  double exclusion_radius, int bumps, std::uint64_t seed) {
    const int d = b.dim();
    const double h = region.spacing();
    const auto singulars = b.singular_points();

    auto excluded = [&](const Point& x) {
        for (const auto& s : singulars) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += (x[a] - s[a]) * (x[a] - s[a]);
            if (r2 < exclusion_radius * exclusion_radius) return true;
        }
        // stencil must stay inside the sampled box
        for (int a = 0; a < d; ++a)
            if (std::abs(x[a]) + h > region.half_width) return true;
        return false;
    };

    DivergenceReport rep;
    const std::size_t n = region.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point x = region.point_at(i);
        if (excluded(x)) continue;
        double div = 0.0;
        bool ok = true;
        for (int a = 0; a < d && ok; ++a) {
            Point xp = x, xm = x;
            xp[a] += h;
            xm[a] -= h;
            try {
                div += (b.eval(0.0, xp)[a] - b.eval(0.0, xm)[a]) / (2.0 * h);
            } catch (const SingularPointError&) {
                ok = false;
            }
        }
        if (ok) rep.max_central_divergence = std::max(rep.max_central_divergence, std::abs(div));
    }

    // Weak form against random compact bumps phi(x) = (1 - |x-c|^2/w^2)^3,
    // kept clear of the excluded balls. The gradient is the central
    // difference of the sampled bump, so sum_i b . D_c phi telescopes to
    // -sum_i (D_c . b) phi exactly and constants integrate to zero to
    // machine precision.
    const std::vector<double> drift_samples = [&] {
        std::vector<double> vals(n * static_cast<std::size_t>(d), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            try {
                const Point v = b.eval(0.0, region.point_at(i));
                for (int a = 0; a < d; ++a) vals[static_cast<std::size_t>(a) * n + i] = v[a];
            } catch (const SingularPointError&) {
            }
        }
        return vals;
    }();
    std::array<std::size_t, 3> stride{0, 0, 0};
    {
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[static_cast<std::size_t>(a)] = s;
            s *= static_cast<std::size_t>(region.points);
        }
    }

    for (int bi = 0; bi < bumps; ++bi) {
        ScalarRng rng(seed, 21, static_cast<std::uint32_t>(bi));
        Point c{0.0, 0.0, 0.0};
        double w = 0.0;
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            for (int a = 0; a < d; ++a)
                c[a] = rng.uniform(-region.half_width / 2, region.half_width / 2);
            w = rng.uniform(region.half_width / 8, region.half_width / 2.5);
            placed = true;
            for (const auto& sPt : singulars) {
                double r2 = 0.0;
                for (int a = 0; a < d; ++a) r2 += (c[a] - sPt[a]) * (c[a] - sPt[a]);
                if (std::sqrt(r2) < exclusion_radius + w + 2.0 * h) placed = false;
            }
            for (int a = 0; a < d; ++a)
                if (std::abs(c[a]) + w + 2.0 * h > region.half_width) placed = false;
        }
        if (!placed) continue;

        std::vector<double> phi(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Point x = region.point_at(i);
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
            const double u = 1.0 - r2 / (w * w);
            if (u > 0.0) phi[i] = u * u * u;
        }
        double resid = 0.0, grad_l1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // interior stencil only; the bump vanishes near the box boundary
            bool interior = true;
            for (int a = 0; a < d; ++a) {
                const std::size_t ia = (i / stride[static_cast<std::size_t>(a)]) %
                                       static_cast<std::size_t>(region.points);
                if (ia == 0 || ia + 1 == static_cast<std::size_t>(region.points)) interior = false;
            }
            if (!interior) continue;
            double dot = 0.0, g2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const std::size_t sa = stride[static_cast<std::size_t>(a)];
                const double gphi = (phi[i + sa] - phi[i - sa]) / (2.0 * h);
                dot += drift_samples[static_cast<std::size_t>(a) * n + i] * gphi;
                g2 += gphi * gphi;
            }
            resid += dot;
            grad_l1 += std::sqrt(g2);
        }
        if (grad_l1 > 0.0)
            rep.max_weak_residual = std::max(rep.max_weak_residual, std::abs(resid) / grad_l1);
    }
    return rep;
}

}  // namespace sdelab::drift
