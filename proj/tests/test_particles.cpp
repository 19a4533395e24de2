#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <fstream>
#include "sdelab/fpe.hpp"
#include "sdelab/particles.hpp"

using namespace sdelab;
using namespace sdelab::particles;

TEST_CASE("init_particles") {
    SUBCASE("point mass puts everything at the atom") {
        auto st = init_particles(MeasureSpec::delta(2, {0.5, -1.0, 0}), 100, 1);
        CHECK(st.count() == 100);
        for (std::size_t i = 0; i < st.count(); ++i) {
            CHECK(st.position(i)[0] == 0.5);
            CHECK(st.position(i)[1] == -1.0);
            CHECK(st.weights[i] == doctest::Approx(0.01));
        }
    }
    SUBCASE("two equal atoms split the ensemble in half") {
        MeasureSpec z;
        z.dim = 2;
        z.add_atom({-1, 0, 0}, 0.5);
        z.add_atom({1, 0, 0}, 0.5);
        auto st = init_particles(z, 1000, 2);
        std::size_t left = 0;
        for (std::size_t i = 0; i < st.count(); ++i)
            if (st.position(i)[0] < 0) ++left;
        CHECK(std::abs(static_cast<double>(left) - 500.0) < 60.0);
        CHECK(st.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("standard gaussian: CLT-level moments") {
        const std::size_t n = 10000;
        auto st = init_particles(MeasureSpec::gaussian(2, {0, 0, 0}, 1.0), n, 3);
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += st.position(i)[0];
            my += st.position(i)[1];
        }
        mx /= n;
        my /= n;
        CHECK(std::abs(mx) < 3.0 / std::sqrt(n));
        CHECK(std::abs(my) < 3.0 / std::sqrt(n));
        double cxx = 0, cyy = 0, cxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            cxx += st.position(i)[0] * st.position(i)[0];
            cyy += st.position(i)[1] * st.position(i)[1];
            cxy += st.position(i)[0] * st.position(i)[1];
        }
        CHECK(std::abs(cxx / n - 1.0) < 5.0 / std::sqrt(n));
        CHECK(std::abs(cyy / n - 1.0) < 5.0 / std::sqrt(n));
        CHECK(std::abs(cxy / n) < 5.0 / std::sqrt(n));
    }
    SUBCASE("zero total variation rejected") {
        MeasureSpec z;
        z.dim = 2;
        CHECK_THROWS(init_particles(z, 10, 1));
    }
}

TEST_CASE("interaction drift") {
    InteractionKernel k;
    k.eps = 0.1;

    SUBCASE("single particle feels nothing at its own location") {
        auto st = init_particles(MeasureSpec::delta(2, {0.3, 0.7, 0}), 1, 1);
        const Point d = interaction_drift(st, k, {0.3, 0.7, 0});
        CHECK(d[0] == 0.0);
        CHECK(d[1] == 0.0);
    }
    SUBCASE("two-body closed form: equal speeds, opposite perpendicular directions") {
        ParticleState st;
        st.dim = 2;
        st.positions = {0.5, 0.0, -0.5, 0.0};
        st.weights = {0.5, 0.5};
        const Point d1 = interaction_drift(st, k, {0.5, 0.0, 0});   // feels particle 2
        const Point d2 = interaction_drift(st, k, {-0.5, 0.0, 0});  // feels particle 1
        const double c = 0.5 / (2.0 * M_PI * (1.0 + k.eps * k.eps));
        CHECK(d1[0] == doctest::Approx(0.0));
        CHECK(d1[1] == doctest::Approx(c).epsilon(1e-12));
        CHECK(d2[0] == doctest::Approx(0.0));
        CHECK(d2[1] == doctest::Approx(-c).epsilon(1e-12));
        CHECK(std::hypot(d1[0], d1[1]) == doctest::Approx(std::hypot(d2[0], d2[1])));
    }
    SUBCASE("radially symmetric cloud: drift at the center is O(1/sqrt(N))") {
        const std::size_t n = 4000;
        auto st = init_particles(MeasureSpec::gaussian(2, {0, 0, 0}, 1.0), n, 7);
        const Point d = interaction_drift(st, k, {0, 0, 0});
        CHECK(std::hypot(d[0], d[1]) < 3.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("synchronous step") {
    SUBCASE("kernel = 0: independent Brownian motions, variance grows by 2 dt") {
        const std::size_t n = 20000;
        auto st = init_particles(MeasureSpec::delta(2), n, 4);
        InteractionKernel none;
        none.kind = InteractionKernel::Kind::none;
        StepConfig cfg;
        cfg.dt = 0.05;
        cfg.seed = 11;
        auto out = step_particles(st, none, cfg, 0);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += out.position(i)[0] * out.position(i)[0];
        v /= n;
        CHECK(std::abs(v - 2.0 * cfg.dt) < 3.0 * 2.0 * cfg.dt * std::sqrt(2.0 / n));
    }

    SUBCASE("weight conservation is exact across steps") {
        MeasureSpec z;
        z.dim = 2;
        z.add_gaussian({-0.5, 0, 0}, 0.4, 0.7);
        z.add_gaussian({0.5, 0, 0}, 0.4, -0.3);
        auto st = init_particles(z, 500, 5);
        const double w0 = st.weight_sum();
        InteractionKernel k;
        k.eps = 0.1;
        StepConfig cfg;
        cfg.dt = 0.01;
        for (std::uint32_t s = 0; s < 20; ++s) st = step_particles(st, k, cfg, s);
        CHECK(st.weight_sum() == w0);  // bitwise: weights never touched
    }

    SUBCASE("antisymmetric kernel: snapshot centroid drift vanishes to 1e-12") {
        auto st = init_particles(MeasureSpec::gaussian(2, {0, 0, 0}, 1.0), 1500, 6);
        InteractionKernel k;
        k.eps = 0.08;
        const Point cd = centroid_drift(st, k);
        CHECK(std::abs(cd[0]) < 1e-12);
        CHECK(std::abs(cd[1]) < 1e-12);
    }
}

TEST_CASE("empirical density") {
    SUBCASE("all weight in one cell") {
        auto st = init_particles(MeasureSpec::delta(2, {0.1, 0.1, 0}), 50, 1);
        GridSpec g{2, 4.0, 16, Centering::cell};
        auto f = empirical_density(st, g, sde::DensityMethod::histogram);
        double total = 0.0;
        std::size_t occupied = 0;
        for (std::size_t i = 0; i < f.cells(); ++i)
            if (f.at(i) != 0.0) {
                ++occupied;
                total = f.at(i);
            }
        CHECK(occupied == 1);
        CHECK(total == doctest::Approx(1.0 / g.cell_measure()).epsilon(1e-12));
    }
    SUBCASE("signed dipole integrates to zero") {
        MeasureSpec z;
        z.dim = 2;
        z.add_gaussian({-1, 0, 0}, 0.5, 1.0);
        z.add_gaussian({1, 0, 0}, 0.5, -1.0);
        auto st = init_particles(z, 2000, 2);
        GridSpec g{2, 6.0, 64, Centering::cell};
        auto f = empirical_density(st, g, sde::DensityMethod::kde, 0.3);
        CHECK(std::abs(f.integral()) < 1e-10);
    }
    SUBCASE("gaussian cloud KDE close to the analytic gaussian") {
        // the KDE estimates rho * G_bw exactly in expectation, so the
        // variance-matched Gaussian is the bias-free target
        const std::size_t n = 10000;
        const double bw = 0.35;
        auto st = init_particles(MeasureSpec::gaussian(2, {0, 0, 0}, 1.0), n, 9);
        GridSpec g{2, 6.0, 128, Centering::cell};
        auto f = empirical_density(st, g, sde::DensityMethod::kde, bw);
        const double s2 = 1.0 + bw * bw;
        auto exact = SampledField::sample_scalar(g, [&](const Point& x) {
            return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * s2)) / (2.0 * M_PI * s2);
        });
        CHECK(l1_distance(f, exact) < 0.05);
    }
}

TEST_CASE("cell list matches direct summation within the cutoff bound") {
    auto st = init_particles(MeasureSpec::gaussian(2, {0, 0, 0}, 1.0), 2000, 12);
    InteractionKernel k;
    k.eps = 0.1;
    StepConfig direct;
    direct.dt = 0.01;
    direct.seed = 3;
    StepConfig listed = direct;
    listed.use_cell_list = true;
    listed.cutoff_radius = 2.5;
    auto a = step_particles(st, k, direct, 0);
    auto b = step_particles(st, k, listed, 0);
    const double bound = cell_list_error_bound(st, k, listed.cutoff_radius) * direct.dt;
    double worst = 0.0;
    for (std::size_t i = 0; i < st.count(); ++i) {
        worst = std::max(worst, std::abs(a.position(i)[0] - b.position(i)[0]));
        worst = std::max(worst, std::abs(a.position(i)[1] - b.position(i)[1]));
    }
    CHECK(worst <= bound);
    CHECK(worst > 0.0);  // the cutoff does drop some far field
}

TEST_CASE("oseen reduction: vortex blob cloud from a point matches the heat kernel") {
    // radial vorticity: the advection only swirls, so the density follows
    // the heat flow; compare the 4-run averaged KDE with h(t) at t = 0.5
    const std::size_t n = 10000;
    const double t_end = 0.5;
    GridSpec g{2, 6.0, 64, Centering::cell};
    SampledField avg(g, 1);
    const int runs = 4;
    for (int run = 0; run < runs; ++run) {
        auto st = init_particles(MeasureSpec::delta(2), n, 100 + run);
        st.blob_scale = default_blob_scale(n, 2);
        InteractionKernel k;
        k.eps = st.blob_scale;
        StepConfig cfg;
        cfg.dt = 0.01;
        cfg.seed = 200 + run;
        for (std::uint32_t s = 0; s < 50; ++s) st = step_particles(st, k, cfg, s);
        auto f = empirical_density(st, g, sde::DensityMethod::kde, 0.22);
        for (std::size_t i = 0; i < f.cells(); ++i) avg.at(i) += f.at(i) / runs;
    }
    auto exact = SampledField::sample_scalar(g, [&](const Point& x) {
        return kernels::heat_kernel(t_end, x, 2);
    });
    CHECK(l1_distance(avg, exact) < 0.05);
}

TEST_CASE("frames binary layout") {
    auto st = init_particles(MeasureSpec::delta(2, {1, 2, 0}), 3, 1);
    std::vector<ParticleState> frames{st, st};
    frames[1].time = 0.25;
    write_frames_bin("/tmp/sdelab_frames.bin", frames);
    std::ifstream f("/tmp/sdelab_frames.bin", std::ios::binary);
    char magic[4];
    f.read(magic, 4);
    CHECK(std::string(magic, 4) == "PTC1");
    std::uint32_t d;
    std::uint64_t n;
    double dt;
    f.read(reinterpret_cast<char*>(&d), 4);
    f.read(reinterpret_cast<char*>(&n), 8);
    f.read(reinterpret_cast<char*>(&dt), 8);
    CHECK(d == 2);
    CHECK(n == 3);
    CHECK(dt == 0.25);
}

TEST_CASE("centroid stays within the Brownian noise over a full run") {
    const std::size_t n = 2000;
    auto st = init_particles(MeasureSpec::gaussian(2, {0, 0, 0}, 1.0), n, 33);
    InteractionKernel k;
    k.eps = 0.1;
    StepConfig cfg;
    cfg.dt = 0.01;
    cfg.seed = 17;
    const int steps = 50;
    for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(steps); ++s)
        st = step_particles(st, k, cfg, s);
    double cx = 0, cy = 0, w2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cx += st.weights[i] * st.position(i)[0];
        cy += st.weights[i] * st.position(i)[1];
        w2 += st.weights[i] * st.weights[i];
    }
    // drift cancels pairwise, so the centroid is a pure Brownian average:
    // variance 2 T sum w_i^2 per coordinate
    const double sigma = std::sqrt(2.0 * steps * cfg.dt * w2);
    CHECK(std::abs(cx) < 3.0 * sigma);
    CHECK(std::abs(cy) < 3.0 * sigma);
}
