#include "sdelab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdelab/lorentz.hpp"
#include "sdelab/rng.hpp"
#include "sdelab/spectral.hpp"

namespace sdelab::lorentz {

namespace {

constexpr std::uint32_t kStreamFieldA = 11;
constexpr std::uint32_t kStreamFieldB = 12;

double derived_p(const InequalityParams& pr) {
    switch (pr.kind) {
        case InequalityKind::holder:
            return 1.0 / (1.0 / pr.p1 + 1.0 / pr.p2);
        case InequalityKind::young:
            return 1.0 / (1.0 / pr.p1 + 1.0 / pr.p2 - 1.0);
        case InequalityKind::interpolation:
            return 1.0 / (pr.theta / pr.p1 + (1.0 - pr.theta) / pr.p2);
        default:
            return 0.0;
    }
}

double derived_q(const InequalityParams& pr) {
    return 1.0 / (1.0 / pr.q1 + 1.0 / pr.q2);
}

SampledField gradient_magnitude(const SampledField& u) {
    // periodic central differences; suite fields vanish near the boundary
    const GridSpec& g = u.grid();
    const int m = g.points;
    const double inv2h = 1.0 / (2.0 * g.spacing());
    SampledField out(g, 1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const int ip = (i + 1) % m, im = (i + m - 1) % m;
            const int jp = (j + 1) % m, jm = (j + m - 1) % m;
            const double ux = (u.at(static_cast<std::size_t>(ip) * m + j) -
                               u.at(static_cast<std::size_t>(im) * m + j)) * inv2h;
            const double uy = (u.at(static_cast<std::size_t>(i) * m + jp) -
                               u.at(static_cast<std::size_t>(i) * m + jm)) * inv2h;
            out.at(static_cast<std::size_t>(i) * m + j) = std::sqrt(ux * ux + uy * uy);
        }
    return out;
}

SampledField lambda_power(const SampledField& u, double s) {
    Spectral2D sp(u.grid().points, u.grid().half_width);
    auto spec = sp.forward(u.raw());
    sp.apply_power(spec, s);
    SampledField out(u.grid(), 1);
    out.raw() = sp.backward(std::move(spec));
    return out;
}

double besov_holder_norm(const SampledField& u, double alpha) {
    // || u ||_{B^alpha_{inf,inf}} via sharp dyadic frequency blocks
    Spectral2D sp(u.grid().points, u.grid().half_width);
    const auto spec = sp.forward(u.raw());
    double best = 0.0;
    for (int j = sp.dyadic_min(); j <= sp.dyadic_max(); ++j) {
        const auto block = sp.dyadic_block(spec, j);
        double m = 0.0;
        for (double v : block) m = std::max(m, std::abs(v));
        best = std::max(best, std::pow(2.0, j * alpha) * m);
    }
    return best;
}

struct PoincareResult {
    double lhs;
    double rhs;
};

PoincareResult poincare_sides(const SampledField& u, double q) {
    const GridSpec& g = u.grid();
    const double R = 0.5 * g.half_width;
    // weight phi_R(x) = (1 - |x/R|^2)^3 inside B_R
    double wsum = 0.0, uw = 0.0;
    const std::size_t n = u.cells();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Point x = g.point_at(i);
        const double r2 = (x[0] * x[0] + x[1] * x[1]) / (R * R);
        if (r2 < 1.0) {
            const double v = std::pow(1.0 - r2, 3);
            w[i] = v;
            wsum += v;
            uw += v * u.at(i);
        }
    }
    const double mean = uw / wsum;
    const SampledField grad = gradient_magnitude(u);
    double num = 0.0, den = 0.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point x = g.point_at(i);
        if (x[0] * x[0] + x[1] * x[1] < R * R) {
            num += std::pow(std::abs(u.at(i) - mean), q);
            den += std::pow(grad.at(i), q);
            ++inside;
        }
    }
    const double lhs = std::pow(num / inside, 1.0 / q);
    const double rhs = R * std::pow(den / inside, 1.0 / q);
    return {lhs, rhs};
}

}  // namespace

InequalityKind inequality_kind_from_string(const std::string& s) {
    if (s == "holder") return InequalityKind::holder;
    if (s == "young") return InequalityKind::young;
    if (s == "interpolation") return InequalityKind::interpolation;
    if (s == "ladyzhenskaya") return InequalityKind::ladyzhenskaya;
    if (s == "gagliardo_nirenberg") return InequalityKind::gagliardo_nirenberg;
    if (s == "poincare") return InequalityKind::poincare;
    throw std::invalid_argument("unknown inequality kind: " + s);
}

std::string to_string(InequalityKind k) {
    switch (k) {
        case InequalityKind::holder: return "holder";
        case InequalityKind::young: return "young";
        case InequalityKind::interpolation: return "interpolation";
        case InequalityKind::ladyzhenskaya: return "ladyzhenskaya";
        case InequalityKind::gagliardo_nirenberg: return "gagliardo_nirenberg";
        case InequalityKind::poincare: return "poincare";
    }
    return "?";
}

void InequalityParams::validate() const {
    switch (kind) {
        case InequalityKind::holder: {
            if (!(p1 >= 1.0 && p2 >= 1.0 && q1 >= 1.0 && q2 >= 1.0))
                throw std::invalid_argument("holder: exponents must be >= 1");
            break;
        }
        case InequalityKind::young: {
            const double p = derived_p(*this);
            if (!(p1 > 1.0 && p2 > 1.0 && std::isfinite(p) && p > 1.0))
                throw std::invalid_argument("young: need 1 < p1, p2, p < inf with 1 + 1/p = 1/p1 + 1/p2");
            break;
        }
        case InequalityKind::interpolation: {
            if (!(theta > 0.0 && theta < 1.0 && p1 >= 1.0 && p2 > p1 && q >= 1.0))
                throw std::invalid_argument("interpolation: need 1 <= p1 < p2 and theta in (0,1)");
            break;
        }
        case InequalityKind::ladyzhenskaya:
            break;
        case InequalityKind::gagliardo_nirenberg: {
            if (!(0.0 < gn_alpha && gn_alpha < gn_sigma && gn_sigma <= gn_s))
                throw std::invalid_argument("gagliardo_nirenberg: need 0 < alpha < sigma <= s");
            const double th = (gn_sigma - gn_alpha) / (gn_s - gn_alpha);
            if (!(p1 / th > 1.0 && q1 / th >= 1.0))
                throw std::invalid_argument("gagliardo_nirenberg: derived exponents out of range");
            break;
        }
        case InequalityKind::poincare: {
            if (!(poincare_q >= 1.0)) throw std::invalid_argument("poincare: q >= 1");
            break;
        }
    }
}

SampledField random_bump_field(const GridSpec& g, std::uint64_t seed, std::uint32_t instance) {
    ScalarRng rng(seed, kStreamFieldA, instance);
    const int nb = 1 + rng.uniform_int(8);
    struct Bump {
        double cx, cy, sx, sy, a;
    };
    std::vector<Bump> bumps(static_cast<std::size_t>(nb));
    const double L = g.half_width;
    for (auto& b : bumps) {
        b.cx = rng.uniform(-L / 2, L / 2);
        b.cy = rng.uniform(-L / 2, L / 2);
        b.sx = rng.log_uniform(L / 64, L / 8);
        b.sy = rng.log_uniform(L / 64, L / 8);
        b.a = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.25, 1.0);
    }
    return SampledField::sample_scalar(g, [&](const Point& x) {
        double v = 0.0;
        for (const auto& b : bumps) {
            const double dx = (x[0] - b.cx) / b.sx;
            const double dy = (x[1] - b.cy) / b.sy;
            v += b.a * std::exp(-0.5 * (dx * dx + dy * dy));
        }
        return v;
    });
}

RatioSample evaluate_inequality(const InequalityParams& pr, const SampledField& f,
                                const SampledField& g2) {
    switch (pr.kind) {
        case InequalityKind::holder: {
            const double p = derived_p(pr), q = derived_q(pr);
            SampledField prod(f.grid(), 1);
            for (std::size_t i = 0; i < f.cells(); ++i) prod.at(i) = f.at(i) * g2.at(i);
            const double lhs = lorentz_norm(prod, {p, q});
            const double rhs = lorentz_norm(f, {pr.p1, pr.q1}) * lorentz_norm(g2, {pr.p2, pr.q2});
            return {lhs, rhs};
        }
        case InequalityKind::young: {
            const double p = derived_p(pr);
            const double q = 1.0 / std::min(1.0, 1.0 / pr.q1 + 1.0 / pr.q2);
            const SampledField conv = linear_convolution(f, g2);
            const double lhs = lorentz_norm(conv, {p, q});
            const double rhs = lorentz_norm(f, {pr.p1, pr.q1}) * lorentz_norm(g2, {pr.p2, pr.q2});
            return {lhs, rhs};
        }
        case InequalityKind::interpolation: {
            const double p = derived_p(pr);
            const double lhs = lorentz_norm(f, {p, pr.q});
            const double rhs = std::pow(weak_norm(f, pr.p1), pr.theta) *
                               std::pow(weak_norm(f, pr.p2), 1.0 - pr.theta);
            return {lhs, rhs};
        }
        case InequalityKind::ladyzhenskaya: {
            const double lhs = lorentz_norm(f, {4.0, 2.0});  // 2d/(d-1) = 4 in d = 2
            const SampledField grad = gradient_magnitude(f);
            const double rhs = std::sqrt(grad.lp_norm(2.0)) * std::sqrt(f.lp_norm(2.0));
            return {lhs, rhs};
        }
        case InequalityKind::gagliardo_nirenberg: {
            const double th = (pr.gn_sigma - pr.gn_alpha) / (pr.gn_s - pr.gn_alpha);
            const double p = pr.p1 / th, q = pr.q1 / th;
            const double lhs = lorentz_norm(lambda_power(f, pr.gn_sigma), {p, q});
            const double rhs = std::pow(lorentz_norm(lambda_power(f, pr.gn_s), {pr.p1, pr.q1}), th) *
                               std::pow(besov_holder_norm(f, pr.gn_alpha), 1.0 - th);
            return {lhs, rhs};
        }
        case InequalityKind::poincare: {
            const auto r = poincare_sides(f, pr.poincare_q);
            return {r.lhs, r.rhs};
        }
    }
    return {};
}

ExperimentReport inequality_suite(const InequalityParams& params, const SuiteConfig& cfg) {
    params.validate();
    const std::string kind = to_string(params.kind);
    ExperimentReport rep("inequality-" + kind);

    const GridSpec base{2, cfg.half_width, cfg.resolution, Centering::node};
    const GridSpec fine{2, cfg.half_width, 2 * cfg.resolution, Centering::node};

    auto run_trials = [&](const GridSpec& g, int from, int count, std::vector<RatioSample>& out) {
        out.assign(static_cast<std::size_t>(count), {});
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < count; ++t) {
            const auto f = random_bump_field(g, cfg.seed, static_cast<std::uint32_t>(from + t));
            const auto g2 = random_bump_field(g, cfg.seed + 0x9E37u, static_cast<std::uint32_t>(from + t));
            out[static_cast<std::size_t>(t)] = evaluate_inequality(params, f, g2);
        }
    };

    // pilot calibration of the constant, then the assessed batch
    std::vector<RatioSample> pilot, main_lo, main_hi;
    run_trials(base, 0, cfg.pilot_trials, pilot);
    double pilot_max = 0.0;
    for (const auto& r : pilot) pilot_max = std::max(pilot_max, r.ratio());
    const double fitted_c = cfg.pilot_margin * pilot_max;

    run_trials(base, cfg.pilot_trials, cfg.trials, main_lo);
    run_trials(fine, cfg.pilot_trials, cfg.trials, main_hi);

    CsvTable table;
    table.name = "inequality_" + kind;
    table.columns = {"kind", "trial", "lhs", "rhs", "ratio"};
    double max_lo = 0.0, max_hi = 0.0;
    int violations = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        const auto& r = main_lo[static_cast<std::size_t>(t)];
        max_lo = std::max(max_lo, r.ratio());
        max_hi = std::max(max_hi, main_hi[static_cast<std::size_t>(t)].ratio());
        if (r.lhs > fitted_c * r.rhs + 1e-30) ++violations;
        if (main_hi[static_cast<std::size_t>(t)].ratio() > fitted_c) ++violations;
        table.add_row({kind, std::to_string(t), fmt_double(r.lhs), fmt_double(r.rhs),
                       fmt_double(r.ratio())});
    }

    // dilation covariance: identical samples relabelled on a 2x smaller box
    double worst_dil = 0.0;
    for (int t = 0; t < std::min(cfg.trials, 16); ++t) {
        auto f = random_bump_field(base, cfg.seed, static_cast<std::uint32_t>(cfg.pilot_trials + t));
        auto g2 = random_bump_field(base, cfg.seed + 0x9E37u,
                                    static_cast<std::uint32_t>(cfg.pilot_trials + t));
        const double r0 = evaluate_inequality(params, f, g2).ratio();
        GridSpec shrunk = base;
        shrunk.half_width = base.half_width / 2.0;
        SampledField fs(shrunk, 1), gs(shrunk, 1);
        fs.raw() = f.raw();
        gs.raw() = g2.raw();
        const double r1 = evaluate_inequality(params, fs, gs).ratio();
        if (r0 > 0.0) worst_dil = std::max(worst_dil, std::abs(r1 / r0 - 1.0));
    }

    const bool finite = std::isfinite(fitted_c) && std::isfinite(max_lo) && std::isfinite(max_hi);
    const bool pass = finite && violations == 0 && worst_dil <= cfg.dilation_tol;

    rep.add_exact("max_ratio", max_lo);
    rep.add_exact("max_ratio_fine", max_hi);
    rep.add_exact("fitted_C", fitted_c);
    rep.add_exact("violations", violations);
    rep.add_exact("dilation_deviation", worst_dil);
    rep.add_check("no_violations", violations == 0);
    rep.add_check("finite_constant", finite);
    rep.add_check("dilation_invariant", worst_dil <= cfg.dilation_tol);
    rep.add_check("pass", pass);

    nlohmann::ordered_json summary;
    summary["kind"] = kind;
    summary["max_ratio"] = max_lo;
    summary["fitted_C"] = fitted_c;
    summary["pass"] = pass;
    rep.merge_payload("summary", summary);
    rep.add_table(std::move(table));
    return rep;
}

ExperimentReport inequality_suite(InequalityKind kind, int trials, std::uint64_t seed) {
    InequalityParams pr;
    pr.kind = kind;
    if (kind == InequalityKind::young) {
        pr.p1 = pr.p2 = 4.0 / 3.0;
        pr.q1 = pr.q2 = 2.0;
    } else if (kind == InequalityKind::interpolation) {
        pr.p1 = 2.0;
        pr.p2 = 6.0;
        pr.theta = 0.5;
    }
    SuiteConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    return inequality_suite(pr, cfg);
}

}  // namespace sdelab::lorentz
