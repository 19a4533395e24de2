#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdelab/grid.hpp"
#include "sdelab/inequalities.hpp"
#include "sdelab/lorentz.hpp"
#include "sdelab/rng.hpp"

using namespace sdelab;
using namespace sdelab::lorentz;

namespace {

SampledField indicator_box(const GridSpec& g, double side, double height = 1.0) {
    return SampledField::sample_scalar(g, [&](const Point& x) {
        for (int a = 0; a < g.dim; ++a)
            if (std::abs(x[a]) > side / 2) return 0.0;
        return height;
    });
}

double box_measure(const GridSpec& g, double side) {
    // measure of the sampled indicator (counts cells, not the continuum box)
    const auto f = indicator_box(g, side);
    double n = 0;
    for (double v : f.raw())
        if (v > 0) n += 1;
    return n * g.cell_measure();
}

}  // namespace

TEST_CASE("weak norm of |x|^-1 in 2d approaches sqrt(pi)") {
    GridSpec g{2, 20.0, 2048, Centering::cell};
    const auto f = SampledField::sample_scalar(g, [](const Point& x) {
        return 1.0 / std::hypot(x[0], x[1]);
    });
    const double w = weak_norm(f, 2.0);
    const double exact = std::sqrt(M_PI);  // sup_t t (pi t^-2)^(1/2)
    CHECK(std::abs(w - exact) / exact < 0.02);
}

TEST_CASE("weak norm of a constant box is c m^(1/p)") {
    GridSpec g{2, 4.0, 128, Centering::cell};
    const double c = 3.5;
    const auto f = indicator_box(g, 2.0, c);
    const double m = box_measure(g, 2.0);
    for (double p : {1.0, 2.0, 3.0}) {
        CHECK(weak_norm(f, p) == doctest::Approx(c * std::pow(m, 1.0 / p)).epsilon(1e-12));
    }
}

TEST_CASE("weak norm of zero is zero, empty/non-finite rejected") {
    GridSpec g{2, 4.0, 32, Centering::cell};
    SampledField z(g, 1);
    CHECK(weak_norm(z, 2.0) == 0.0);
    z.at(5) = std::nan("");
    CHECK_THROWS(weak_norm(z, 2.0));
}

TEST_CASE("weak norm scales exactly with constants") {
    GridSpec g{2, 4.0, 64, Centering::cell};
    const auto f = random_bump_field(g, 7, 0);
    SampledField cf = f;
    const double c = -2.75;
    for (double& v : cf.raw()) v *= c;
    for (double p : {1.5, 2.0, 4.0})
        CHECK(weak_norm(cf, p) == doctest::Approx(std::abs(c) * weak_norm(f, p)).epsilon(1e-13));
}

TEST_CASE("weak norm of |x|^(-d/p) converges to unit ball volume^(1/p)") {
    // d = 2, p = 2: omega_2 = pi; d = 3, p = 2: omega_3 = 4 pi / 3
    {
        GridSpec g{2, 16.0, 1024, Centering::cell};
        const auto f = SampledField::sample_scalar(g, [](const Point& x) {
            return 1.0 / std::hypot(x[0], x[1]);
        });
        CHECK(std::abs(weak_norm(f, 2.0) - std::sqrt(M_PI)) / std::sqrt(M_PI) < 0.03);
    }
    {
        GridSpec g{3, 8.0, 160, Centering::cell};
        const auto f = SampledField::sample_scalar(g, [](const Point& x) {
            const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            return std::pow(r, -1.5);
        });
        const double exact = std::sqrt(4.0 * M_PI / 3.0);
        CHECK(std::abs(weak_norm(f, 2.0) - exact) / exact < 0.05);
    }
}

TEST_CASE("lorentz norm of an indicator matches the closed form") {
    GridSpec g{2, 4.0, 128, Centering::cell};
    const auto f = indicator_box(g, 2.0);
    const double m = box_measure(g, 2.0);
    // (p/q)^(1/q) m^(1/p)
    CHECK(lorentz_norm(f, {2.0, 1.0}) == doctest::Approx(2.0 * std::sqrt(m)).epsilon(1e-12));
    CHECK(lorentz_norm(f, {3.0, 2.0}) ==
          doctest::Approx(std::pow(1.5, 0.5) * std::pow(m, 1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("L^(p,p) equals L^p on step functions") {
    GridSpec g{2, 4.0, 64, Centering::cell};
    auto f = indicator_box(g, 2.0, 2.0);
    // add a second level set
    for (std::size_t i = 0; i < f.cells() / 3; ++i) f.at(i) = 0.5;
    for (double p : {1.0, 2.0, 3.5}) {
        CHECK(std::abs(lorentz_norm(f, {p, p}) - f.lp_norm(p)) <= 1e-10 * f.lp_norm(p));
    }
}

TEST_CASE("lorentz q=inf routes to the weak norm and zero fields return 0") {
    GridSpec g{2, 4.0, 64, Centering::cell};
    const auto f = random_bump_field(g, 3, 1);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(lorentz_norm(f, {2.0, inf}) == weak_norm(f, 2.0));
    SampledField z(g, 1);
    CHECK(lorentz_norm(z, {2.0, 1.5}) == 0.0);
}

TEST_CASE("Lorentz secondary-exponent embedding with the sharp step constant") {
    // ||f||_{p,r} <= (q/p)^(1/q - 1/r) ||f||_{p,q} for q < r
    GridSpec g{2, 4.0, 48, Centering::cell};
    const double p = 2.0, q = 1.0, r = 3.0;
    const double c = std::pow(q / p, 1.0 / q - 1.0 / r);
    double worst = 0.0;
    for (std::uint32_t i = 0; i < 100; ++i) {
        // random piecewise-constant field
        ScalarRng rng(11, 3, i);
        SampledField f(g, 1);
        const int nlev = 1 + rng.uniform_int(6);
        for (std::size_t c2 = 0; c2 < f.cells(); ++c2)
            f.at(c2) = static_cast<double>(rng.uniform_int(nlev + 1));
        if (f.lp_norm(p) == 0.0) continue;
        worst = std::max(worst, lorentz_norm(f, {p, r}) / lorentz_norm(f, {p, q}));
    }
    CHECK(worst <= c * (1 + 1e-9));
}

TEST_CASE("krylov admissibility predicate") {
    CHECK(is_krylov_admissible(2, 4.0, 4.0));          // sum = 1
    CHECK_FALSE(is_krylov_admissible(3, 3.0, 2.0));    // sum = 2, boundary excluded
    CHECK_FALSE(is_krylov_admissible(2, 1.0, 100.0));  // p must exceed 1
    CHECK(KrylovIndex(2, 3.0, 6.0).admissible);
    CHECK_FALSE(KrylovIndex(2, 1.5, 2.0).admissible);

    // strict monotonicity in 1/p and 1/q at the boundary
    CHECK(is_krylov_admissible(3, 3.0 + 1e-6, 2.0 + 1e-6));
    CHECK_FALSE(is_krylov_admissible(3, 3.0 - 1e-6, 2.0));
}

TEST_CASE("mixed norm: separable, constant in time, heat trajectory") {
    GridSpec g{2, 12.0, 256, Centering::cell};
    const double T = 1.0;
    const int K = 64;

    auto heat = [](double t, const Point& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (4 * t)) / (4 * M_PI * t);
    };

    SUBCASE("separable a(t)b(x)") {
        std::vector<SampledField> frames;
        for (int k = 0; k <= K; ++k) {
            const double t = T * k / K;
            auto f = SampledField::sample_scalar(g, [&](const Point& x) {
                return (1.0 + t * t) * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
            });
            frames.push_back(std::move(f));
        }
        SpaceTimeField f(0, T, std::move(frames));
        const double norm = mixed_norm(f, 2.0, 3.0);
        // ||a||_{L^3_t} ||b||_{L^2_x} with matching trapezoid quadrature
        double at = 0.0;
        for (int k = 0; k <= K; ++k) {
            const double t = T * k / K;
            at += ((k == 0 || k == K) ? 0.5 : 1.0) * (T / K) * std::pow(1 + t * t, 3);
        }
        const double a3 = std::pow(at, 1.0 / 3.0);
        const double b2 = std::sqrt(M_PI);  // || exp(-|x|^2/2) ||_2 in 2d
        CHECK(norm == doctest::Approx(a3 * b2).epsilon(1e-3));
    }

    SUBCASE("constant in time gives T^(1/q) ||b||_p") {
        auto b = SampledField::sample_scalar(g, [&](const Point& x) { return heat(0.3, x); });
        std::vector<SampledField> frames(K + 1, b);
        SpaceTimeField f(0, T, std::move(frames));
        CHECK(mixed_norm(f, 2.0, 4.0) ==
              doctest::Approx(std::pow(T, 0.25) * b.lp_norm(2.0)).epsilon(1e-6));
    }

    SUBCASE("heat kernel trajectory h(t + 0.1)") {
        std::vector<SampledField> frames;
        for (int k = 0; k <= K; ++k) {
            const double t = T * k / K + 0.1;
            frames.push_back(SampledField::sample_scalar(g, [&](const Point& x) { return heat(t, x); }));
        }
        SpaceTimeField f(0, T, std::move(frames));
        // ||h(s)||_{L^2} = (8 pi s)^(-1/2), integrate s = t + 0.1 over [0, 1]
        const double exact = std::sqrt(std::log(1.1 / 0.1) / (8 * M_PI));
        CHECK(mixed_norm(f, 2.0, 2.0) == doctest::Approx(exact).epsilon(1e-3));
    }

    SUBCASE("mismatched frame geometry is rejected") {
        GridSpec g2 = g;
        g2.points = 128;
        std::vector<SampledField> frames{SampledField(g, 1), SampledField(g2, 1)};
        CHECK_THROWS(SpaceTimeField(0, 1, std::move(frames)));
    }
}

TEST_CASE("inequality suite: all kinds finite, no violations, dilation invariant") {
    for (auto kind : {InequalityKind::holder, InequalityKind::young, InequalityKind::interpolation,
                      InequalityKind::ladyzhenskaya, InequalityKind::gagliardo_nirenberg,
                      InequalityKind::poincare}) {
        CAPTURE(to_string(kind));
        InequalityParams pr;
        pr.kind = kind;
        if (kind == InequalityKind::young) {
            pr.p1 = pr.p2 = 4.0 / 3.0;
        } else if (kind == InequalityKind::interpolation) {
            pr.p1 = 2.0;
            pr.p2 = 6.0;
        }
        SuiteConfig cfg;
        cfg.trials = 24;
        cfg.pilot_trials = 48;
        cfg.resolution = 64;
        cfg.seed = 5;
        const auto rep = inequality_suite(pr, cfg);
        CHECK(rep.all_pass());
    }
}

TEST_CASE("inequality suite rejects tuples violating the scaling relation") {
    InequalityParams pr;
    pr.kind = InequalityKind::young;
    pr.p1 = 4.0;
    pr.p2 = 4.0;  // 1/p = 1/4 + 1/4 - 1 < 0
    CHECK_THROWS(pr.validate());

    InequalityParams pr2;
    pr2.kind = InequalityKind::interpolation;
    pr2.p1 = 6.0;
    pr2.p2 = 2.0;
    CHECK_THROWS(pr2.validate());
}

TEST_CASE("zero field passes every inequality trivially") {
    GridSpec g{2, 8.0, 64, Centering::node};
    SampledField z(g, 1);
    for (auto kind : {InequalityKind::holder, InequalityKind::young, InequalityKind::ladyzhenskaya}) {
        InequalityParams pr;
        pr.kind = kind;
        if (kind == InequalityKind::young) pr.p1 = pr.p2 = 4.0 / 3.0;
        const auto r = evaluate_inequality(pr, z, z);
        CHECK(r.lhs == 0.0);
        CHECK(r.rhs == 0.0);
        CHECK(r.ratio() == 0.0);
    }
}

TEST_CASE("ladyzhenskaya single-bump ratio is dilation invariant") {
    GridSpec g{2, 8.0, 128, Centering::node};
    const auto u = SampledField::sample_scalar(g, [](const Point& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 0.8);
    });
    InequalityParams pr;
    pr.kind = InequalityKind::ladyzhenskaya;
    const double r0 = evaluate_inequality(pr, u, u).ratio();
    GridSpec shr = g;
    shr.half_width = g.half_width / 2;
    SampledField us(shr, 1);
    us.raw() = u.raw();
    const double r1 = evaluate_inequality(pr, us, us).ratio();
    CHECK(std::abs(r1 / r0 - 1.0) < 1e-8);
}

TEST_CASE("philox reference vectors") {
    // Random123 known-answer vectors for philox4x32-10
    const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);
    const std::uint32_t ff = 0xffffffffu;
    const auto ones = Philox4x32::block({ff, ff, ff, ff}, {ff, ff});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);
}
