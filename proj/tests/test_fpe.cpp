#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdelab/duhamel.hpp"
#include "sdelab/fpe.hpp"
#include "sdelab/kernels.hpp"

using namespace sdelab;
using namespace sdelab::fpe;

namespace {

SampledField gaussian_field(const GridSpec& g, double sigma, double mass = 1.0,
                            double cx = 0.0, double cy = 0.0) {
    return SampledField::sample_scalar(g, [&](const Point& x) {
        const double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
        return mass * std::exp(-r2 / (2.0 * sigma * sigma)) / (2.0 * M_PI * sigma * sigma);
    });
}

// downsample a node-centered field by an integer factor (node grids nest)
SampledField downsample(const SampledField& f, int factor) {
    GridSpec g = f.grid();
    g.points /= factor;
    SampledField out(g, 1);
    for (int i = 0; i < g.points; ++i)
        for (int j = 0; j < g.points; ++j)
            out.at(static_cast<std::size_t>(i) * g.points + j) =
                f.at((static_cast<std::size_t>(i) * factor) * f.grid().points +
                     static_cast<std::size_t>(j) * factor);
    return out;
}

}  // namespace

TEST_CASE("heat propagation is the exact spectral semigroup") {
    GridSpec g{2, 12.0, 256, Centering::node};
    const auto rho = gaussian_field(g, 0.8);

    SUBCASE("gaussian variance grows by 2 dt per coordinate") {
        const double dt = 0.3;
        const auto out = heat_propagate(rho, dt);
        const double s2 = 0.64 + 2.0 * dt;
        const auto exact = gaussian_field(g, std::sqrt(s2));
        double worst = 0.0;
        for (std::size_t i = 0; i < out.cells(); ++i)
            worst = std::max(worst, std::abs(out.at(i) - exact.at(i)));
        CHECK(worst < 1e-8);
    }
    SUBCASE("dt = 0 is the identity") {
        const auto out = heat_propagate(rho, 0.0);
        for (std::size_t i = 0; i < out.cells(); ++i) CHECK(out.at(i) == rho.at(i));
    }
    SUBCASE("two half steps equal one full step") {
        const auto two = heat_propagate(heat_propagate(rho, 0.15), 0.15);
        const auto one = heat_propagate(rho, 0.3);
        double worst = 0.0;
        for (std::size_t i = 0; i < one.cells(); ++i)
            worst = std::max(worst, std::abs(two.at(i) - one.at(i)));
        CHECK(worst < 1e-12);
    }
    SUBCASE("negative dt rejected") { CHECK_THROWS(heat_propagate(rho, -0.1)); }
}

TEST_CASE("biot-savart spectral inversion") {
    GridSpec g{2, 12.0, 256, Centering::node};

    SUBCASE("gaussian vortex matches the closed-form azimuthal profile") {
        // on the torus the k = 0 mode is dropped, which superposes a solid
        // rotation of angular rate mean(rho)/2; correct for it and the rest
        // is the free-space profile up to periodic images
        const double sigma = 1.0;
        const auto rho = gaussian_field(g, sigma);
        const auto u = biot_savart_velocity(rho);
        const double mean_rho = 1.0 / std::pow(2.0 * g.half_width, 2);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point x = g.point_at(i);
            const double r2 = x[0] * x[0] + x[1] * x[1];
            if (r2 < 0.25 || r2 > 16.0) continue;
            const double gamma = 1.0 - std::exp(-r2 / (2.0 * sigma * sigma));
            const double c = gamma / (2.0 * M_PI * r2) - 0.5 * mean_rho;
            worst = std::max(worst, std::hypot(u.at(i, 0) + x[1] * c, u.at(i, 1) - x[0] * c));
        }
        CHECK(worst < 1.5e-3);  // remaining gap is the periodic image field
    }

    SUBCASE("single Fourier mode inverts in closed form") {
        const double kx = M_PI / 12.0 * 3.0, ky = M_PI / 12.0 * 2.0;
        const double k2 = kx * kx + ky * ky;
        const auto rho = SampledField::sample_scalar(
            g, [&](const Point& x) { return std::cos(kx * x[0] + ky * x[1]); });
        const auto u = biot_savart_velocity(rho);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point x = g.point_at(i);
            const double s = std::sin(kx * x[0] + ky * x[1]) / k2;
            worst = std::max(worst,
                             std::hypot(u.at(i, 0) + ky * s, u.at(i, 1) - kx * s));
        }
        CHECK(worst < 1e-10);
    }

    SUBCASE("radial vorticity: u is orthogonal to grad rho, u has zero mean") {
        // zero total circulation keeps the exterior field (and the periodic
        // images) superexponentially small, so the orthogonality identity is
        // visible at spectral precision
        const double s2 = 0.81;
        const auto rho = SampledField::sample_scalar(g, [&](const Point& x) {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            return (1.0 - r2 / (2.0 * s2)) * std::exp(-r2 / (2.0 * s2));
        });
        const auto u = biot_savart_velocity(rho);
        Spectral2D sp(g.points, g.half_width);
        const auto gx = sp.gradient_component(rho.raw(), 0);
        const auto gy = sp.gradient_component(rho.raw(), 1);
        double worst = 0.0, scale = 0.0;
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            worst = std::max(worst, std::abs(u.at(i, 0) * gx[i] + u.at(i, 1) * gy[i]));
            scale = std::max(scale, std::hypot(gx[i], gy[i]));
            mx += u.at(i, 0);
            my += u.at(i, 1);
        }
        CHECK(worst / scale < 1e-8);
        CHECK(std::abs(mx) < 1e-10);
        CHECK(std::abs(my) < 1e-10);
    }

    SUBCASE("d != 2 rejected") {
        GridSpec g3{3, 4.0, 16, Centering::node};
        SampledField f(g3, 1);
        CHECK_THROWS(biot_savart_velocity(f));
    }
}

TEST_CASE("linear FPE solver") {
    SolveConfig cfg;
    cfg.grid = {12.0, 256};
    cfg.dt = 0.005;
    cfg.horizon = 0.5;
    const auto zeta = MeasureSpec::gaussian(2, {0, 0, 0}, 0.7);

    SUBCASE("b = 0 matches the pure heat evolution") {
        auto traj = solve_linear_fpe(drift::zero_drift(2), zeta, cfg);
        const auto init = zeta.rasterize(cfg.grid.spec());
        const auto heat = heat_propagate(init, cfg.horizon);
        CHECK(l1_distance(traj.final_density(), heat) < 1e-10);
        CHECK(traj.mass_drift() < 1e-12);
    }

    SUBCASE("constant drift translates the density") {
        const Point c{0.8, -0.6, 0};
        auto traj = solve_linear_fpe(drift::constant_drift(2, c), zeta, cfg);
        const auto shifted = MeasureSpec::gaussian(
            2, {c[0] * cfg.horizon, c[1] * cfg.horizon, 0}, 0.7);
        const auto heat = heat_propagate(shifted.rasterize(cfg.grid.spec()), cfg.horizon);
        CHECK(l1_distance(traj.final_density(), heat) < 1e-4);
    }

    SUBCASE("frozen divergence-free vortex: mass exact, L2 non-increasing") {
        // velocity of a fixed radial vortex, sampled as a table drift
        const auto vort = gaussian_field(cfg.grid.spec(), 1.0);
        auto b = drift::table_drift(biot_savart_velocity(vort), true, "frozen_vortex");
        const auto off = MeasureSpec::gaussian(2, {1.0, 0.0, 0}, 0.5);
        auto traj = solve_linear_fpe(b, off, cfg);
        CHECK(traj.mass_drift() < 1e-10);
        for (std::size_t i = 1; i < traj.norms().size(); ++i)
            CHECK(traj.norms()[i].l2 <= traj.norms()[i - 1].l2 * (1.0 + 1e-12));
    }

    SUBCASE("CFL violation rejected") {
        SolveConfig bad = cfg;
        bad.dt = 0.5;
        bad.horizon = 1.0;
        auto b = drift::constant_drift(2, {20.0, 0, 0});
        CHECK_THROWS_WITH_AS(solve_linear_fpe(b, zeta, bad), doctest::Contains("CFL"),
                             std::invalid_argument);
    }
}

TEST_CASE("nonlinear FPE solver") {
    SolveConfig cfg;
    cfg.grid = {12.0, 256};
    cfg.dt = 0.005;
    cfg.horizon = 0.5;

    SUBCASE("radial data reduce to the heat flow") {
        const auto zeta = MeasureSpec::gaussian(2, {0, 0, 0}, 1.0);
        auto traj = solve_nfpe(ConvolutionKernel::biot_savart, zeta, cfg);
        const auto heat = heat_propagate(zeta.rasterize(cfg.grid.spec()), cfg.horizon);
        CHECK(l1_distance(traj.final_density(), heat) < 1e-5);
    }

    SUBCASE("signed dipole keeps zero total mass") {
        MeasureSpec dipole;
        dipole.dim = 2;
        dipole.add_gaussian({-1.0, 0, 0}, 0.5, 1.0);
        dipole.add_gaussian({1.0, 0, 0}, 0.5, -1.0);
        auto traj = solve_nfpe(ConvolutionKernel::biot_savart, dipole, cfg);
        for (const auto& row : traj.norms()) CHECK(std::abs(row.mass) < 1e-12);
    }

    SUBCASE("resolution convergence: Richardson factor >= 3") {
        const auto zeta = MeasureSpec::gaussian(2, {0.6, -0.2, 0}, 0.8);
        SolveConfig c1 = cfg;
        c1.grid.points = 128;
        c1.dt = 0.01;
        c1.horizon = 0.25;
        SolveConfig c2 = c1;
        c2.grid.points = 256;
        c2.dt = 0.005;
        SolveConfig c3 = c2;
        c3.grid.points = 512;
        c3.dt = 0.0025;
        auto t1 = solve_nfpe(ConvolutionKernel::biot_savart, zeta, c1);
        auto t2 = solve_nfpe(ConvolutionKernel::biot_savart, zeta, c2);
        auto t3 = solve_nfpe(ConvolutionKernel::biot_savart, zeta, c3);
        const double e1 = l1_distance(t1.final_density(), downsample(t2.final_density(), 2));
        const double e2 = l1_distance(t2.final_density(), downsample(t3.final_density(), 2));
        CHECK(e1 / e2 >= 3.0);
    }
}

TEST_CASE("duhamel-picard iteration") {
    DuhamelConfig cfg;
    cfg.grid = {12.0, 256};
    cfg.time_nodes = 40;
    cfg.iterations = 7;

    SUBCASE("K = 0 converges in one iteration to the free evolution") {
        const auto zeta = MeasureSpec::gaussian(2, {0, 0, 0}, 0.6);
        auto res = duhamel_picard(ConvolutionKernel::none, zeta, cfg);
        REQUIRE(!res.distances.empty());
        CHECK(res.distances[0] == 0.0);
        CHECK_FALSE(res.diverged);
    }

    SUBCASE("contraction ratio below one and increasing with the initial mass") {
        double prev_ratio = 0.0;
        for (double mass : {0.05, 0.2}) {
            const auto zeta = MeasureSpec::delta(2, {0, 0, 0}, mass);
            auto res = duhamel_picard(ConvolutionKernel::biot_savart, zeta, cfg);
            const double ratio = res.contraction_ratio();
            CHECK(ratio < 1.0);
            CHECK(ratio > prev_ratio);
            prev_ratio = ratio;
        }
    }

    SUBCASE("fixed point agrees with the time stepper") {
        const auto zeta = MeasureSpec::delta(2, {0, 0, 0}, 0.1);
        auto res = duhamel_picard(ConvolutionKernel::biot_savart, zeta, cfg);
        SolveConfig scfg;
        scfg.grid = cfg.grid;
        scfg.dt = 0.0025;
        scfg.horizon = cfg.t0;
        auto traj = solve_nfpe(ConvolutionKernel::biot_savart, zeta, scfg);
        CHECK(l1_distance(res.fixed_point.back(), traj.final_density()) < 1e-3);
    }

    SUBCASE("fixed point independent of extra iterations once converged") {
        const auto zeta = MeasureSpec::delta(2, {0, 0, 0}, 0.05);
        DuhamelConfig more = cfg;
        more.iterations = 10;
        auto a = duhamel_picard(ConvolutionKernel::biot_savart, zeta, cfg);
        auto b = duhamel_picard(ConvolutionKernel::biot_savart, zeta, more);
        CHECK(a.distances.back() < 1e-8);
        CHECK(l1_distance(a.fixed_point.back(), b.fixed_point.back()) < 1e-8);
    }

    SUBCASE("r outside (1, d') rejected") {
        DuhamelConfig bad = cfg;
        bad.r = 2.5;
        CHECK_THROWS(duhamel_picard(ConvolutionKernel::none, MeasureSpec::delta(2), bad));
    }
}

TEST_CASE("decay diagnostic") {
    std::vector<double> tg;
    for (int i = 0; i <= 12; ++i) tg.push_back(1e-3 * std::pow(100.0, i / 12.0));
    const double r = 4.0;

    SUBCASE("atom: flat within 5 percent") {
        auto rows = decay_diagnostic(MeasureSpec::delta(2), r, tg);
        double lo = 1e300, hi = 0.0;
        for (const auto& row : rows) {
            lo = std::min(lo, row.value);
            hi = std::max(hi, row.value);
        }
        CHECK(hi / lo < 1.05);
    }

    SUBCASE("smooth data: decays by 10x and monotone") {
        auto rows = decay_diagnostic(MeasureSpec::gaussian(2, {0, 0, 0}, 0.5), r, tg);
        CHECK(rows.front().value * 10.0 <= rows.back().value);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].value >= rows[i - 1].value);
    }

    SUBCASE("half atom plus half gaussian: small-t limit is half the atom value") {
        MeasureSpec mix;
        mix.dim = 2;
        mix.add_atom({0, 0, 0}, 0.5);
        mix.add_gaussian({0, 0, 0}, 0.5, 0.5);
        auto atom = decay_diagnostic(MeasureSpec::delta(2), r, {1e-3});
        auto mixed = decay_diagnostic(mix, r, {1e-3});
        CHECK(std::abs(mixed[0].value - 0.5 * atom[0].value) < 0.1 * 0.5 * atom[0].value);
    }
}

TEST_CASE("flow property restart") {
    SolveConfig cfg;
    cfg.grid = {12.0, 256};
    cfg.dt = 0.005;
    cfg.horizon = 0.5;
    const auto zeta = MeasureSpec::gaussian(2, {0.5, 0.3, 0}, 0.7);

    SUBCASE("smooth data with the vortex kernel") {
        auto rep = flow_property_check(ConvolutionKernel::biot_savart, zeta, 0.25, cfg);
        CHECK(rep.payload()["results"]["terminal_l1_distance"]["value"].get<double>() < 1e-4);
        CHECK(rep.all_pass());
    }
    SUBCASE("K = 0 is exact up to roundoff") {
        auto rep = flow_property_check(ConvolutionKernel::none, zeta, 0.25, cfg);
        CHECK(rep.payload()["results"]["terminal_l1_distance"]["value"].get<double>() < 1e-10);
    }
    SUBCASE("restart at 0 reproduces the run exactly") {
        auto rep = flow_property_check(ConvolutionKernel::biot_savart, zeta, 0.0, cfg);
        CHECK(rep.payload()["results"]["terminal_l1_distance"]["value"].get<double>() == 0.0);
    }
}
