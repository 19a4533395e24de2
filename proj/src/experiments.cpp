#include "sdelab/experiments.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sdelab/duhamel.hpp"
#include "sdelab/fpe.hpp"
#include "sdelab/inequalities.hpp"
#include "sdelab/kernels.hpp"
#include "sdelab/nonuniqueness.hpp"
#include "sdelab/particles.hpp"
#include "sdelab/sde.hpp"
#include "sdelab/verify.hpp"

namespace sdelab::cli {

namespace {

using json = nlohmann::ordered_json;

double jget(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw SchemaError("config: '" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::int64_t jget_int(const json& j, const std::string& key, std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw SchemaError("config: '" + key + "' must be an integer");
    return j.at(key).get<std::int64_t>();
}

Point jget_point(const json& j, const std::string& key, Point fallback) {
    if (!j.contains(key)) return fallback;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() > 3) throw SchemaError("config: '" + key + "' must be [x, y(, z)]");
    Point p{0, 0, 0};
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i].get<double>();
    return p;
}

MeasureSpec parse_measure(const json& j, int dim) {
    MeasureSpec m;
    m.dim = dim;
    require_keys(j, {"components"}, "measure");
    for (const auto& c : j.at("components")) {
        require_keys(c, {"kind", "center", "mass", "scale"}, "measure component");
        const std::string kind = c.at("kind").get<std::string>();
        const Point center = jget_point(c, "center", {0, 0, 0});
        const double mass = jget(c, "mass", 1.0);
        if (kind == "point_mass")
            m.add_atom(center, mass);
        else if (kind == "gaussian")
            m.add_gaussian(center, jget(c, "scale", 1.0), mass);
        else
            throw SchemaError("measure: unknown component kind '" + kind + "'");
    }
    return m;
}

drift::DriftPtr parse_drift(const json& j) {
    require_keys(j, {"kind", "d", "p", "N", "epsilon", "value", "level", "vorticity", "table_half_width",
                     "table_points"},
                 "drift");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return drift::zero_drift(static_cast<int>(jget_int(j, "d", 2)));
    if (kind == "constant")
        return drift::constant_drift(static_cast<int>(jget_int(j, "d", 2)),
                                     jget_point(j, "value", {0, 0, 0}));
    if (kind == "biot_savart") return drift::biot_savart_drift(jget(j, "epsilon", 0.05));
    if (kind == "supercritical") {
        kernels::SupercriticalSpec spec;
        spec.d = static_cast<int>(jget_int(j, "d", 3));
        spec.p = jget(j, "p", 2.0);
        spec.amplitude = jget(j, "N", 1.0);
        spec.epsilon = jget(j, "epsilon", 0.01);
        spec.validate();
        return drift::supercritical_drift_field(spec);
    }
    if (kind == "blob_velocity" || kind == "mollified_velocity") {
        const GridSpec table{2, jget(j, "table_half_width", 12.0),
                             static_cast<int>(jget_int(j, "table_points", 256)), Centering::node};
        const MeasureSpec vort = j.contains("vorticity")
                                     ? parse_measure(j.at("vorticity"), 2)
                                     : MeasureSpec::gaussian(2, {0, 0, 0}, 1.0);
        auto base = drift::blob_velocity_drift(vort, table, jget(j, "epsilon", 0.0));
        const int level = static_cast<int>(jget_int(j, "level", 0));
        return level > 0 ? drift::mollify_drift(base, level, table) : base;
    }
    throw SchemaError("drift: unknown kind '" + kind + "'");
}

// ----- individual experiments ------------------------------------------

ExperimentReport exp_heat_sanity(const json& p, std::uint64_t) {
    require_keys(p, {"points", "half_width", "horizon", "dt", "sigma"}, "heat-sanity");
    fpe::SolveConfig cfg;
    cfg.grid.points = static_cast<int>(jget_int(p, "points", 256));
    cfg.grid.half_width = jget(p, "half_width", 12.0);
    cfg.dt = jget(p, "dt", 0.005);
    cfg.horizon = jget(p, "horizon", 0.5);
    const double sigma = jget(p, "sigma", 0.7);
    const auto zeta = MeasureSpec::gaussian(2, {0, 0, 0}, sigma);
    auto traj = fpe::solve_linear_fpe(drift::zero_drift(2), zeta, cfg);
    const double s2 = sigma * sigma + 2.0 * cfg.horizon;
    const auto exact = SampledField::sample_scalar(cfg.grid.spec(), [&](const Point& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * s2)) / (2.0 * M_PI * s2);
    });
    const double l1 = l1_distance(traj.final_density(), exact);
    ExperimentReport rep("heat-sanity");
    rep.add_exact("l1_vs_analytic", l1);
    rep.add_exact("mass_drift", traj.mass_drift());
    rep.add_check("heat_identity", l1 < 1e-10);
    rep.add_check("mass_conserved", traj.mass_drift() < 1e-12);
    rep.add_table(traj.norm_table());
    return rep;
}

ExperimentReport exp_brownian_baseline(const json& p, std::uint64_t seed) {
    require_keys(p, {"paths", "horizon", "dt"}, "brownian-baseline");
    sde::SdeConfig cfg;
    cfg.paths = static_cast<std::size_t>(jget_int(p, "paths", 100000));
    cfg.horizon = jget(p, "horizon", 1.0);
    cfg.dt = jget(p, "dt", 0.01);
    cfg.master_seed = seed;
    cfg.store_frames = 2;
    const auto t0 = std::chrono::steady_clock::now();
    auto ens = sde::simulate(drift::zero_drift(2), Point{0, 0, 0}, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ExperimentReport rep("brownian-baseline");
    bool pass = true;
    for (int a = 0; a < 2; ++a) {
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < ens.paths(); ++i) {
            const double v = ens.state(i, 1)[a];
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(ens.paths());
        const double var = s2 / n - (s / n) * (s / n);
        const double se = 2.0 * cfg.horizon * std::sqrt(2.0 / (n - 1));
        rep.add_estimate("variance_axis" + std::to_string(a), var, se / 3.0);
        pass = pass && std::abs(var - 2.0 * cfg.horizon) < 3.0 * se;
    }
    rep.add_check("variance_within_3se", pass);
    rep.add_check("runtime_under_30s", wall < 30.0);
    return rep;
}

ExperimentReport exp_sde_run(const json& p, std::uint64_t seed, const std::string& out_dir) {
    require_keys(p, {"drift", "paths", "horizon", "dt", "start", "store_frames", "track_stopping",
                     "track_exp_functional", "adaptive_substeps", "regularization_eps", "kappa",
                     "drift_csv_points", "drift_csv_half_width"},
                 "sde-run");
    sde::SdeConfig cfg;
    cfg.paths = static_cast<std::size_t>(jget_int(p, "paths", 10000));
    cfg.horizon = jget(p, "horizon", 1.0);
    cfg.dt = jget(p, "dt", 0.005);
    cfg.master_seed = seed;
    cfg.store_frames = static_cast<int>(jget_int(p, "store_frames", 33));
    cfg.track_stopping = p.contains("track_stopping") && p.at("track_stopping").get<bool>();
    cfg.track_exp_functional =
        p.contains("track_exp_functional") && p.at("track_exp_functional").get<bool>();
    cfg.adaptive_substeps = p.contains("adaptive_substeps") && p.at("adaptive_substeps").get<bool>();
    cfg.regularization_eps = jget(p, "regularization_eps", 0.0);
    auto b = p.contains("drift") ? parse_drift(p.at("drift")) : drift::zero_drift(2);
    auto ens = sde::simulate(b, jget_point(p, "start", {0, 0, 0}), cfg);
    ens.write_paths_bin((std::filesystem::path(out_dir) / "paths.bin").string());

    ExperimentReport rep("sde-run");
    rep.add_exact("paths", static_cast<double>(ens.paths()));
    rep.add_exact("invalid_paths", static_cast<double>(ens.invalid_count()));
    const auto tf = sde::t_functional(ens, cfg.horizon);
    rep.add_estimate("t_functional", tf.estimate.value, tf.estimate.std_error);
    json summary;
    summary["paths"] = ens.paths();
    summary["invalid_paths"] = ens.invalid_count();
    summary["t_functional"] = {{"value", tf.estimate.value}, {"std_error", tf.estimate.std_error}};
    if (cfg.track_stopping) {
        auto cone = sde::cone_statistics(ens, jget(p, "kappa", 1.2));
        rep.merge_payload("stopping", cone.payload()["results"]);
        summary["stopping"] = cone.payload()["results"];
    }
    {
        std::ofstream f(std::filesystem::path(out_dir) / "summary.json");
        f << summary.dump(2) << '\n';
    }
    if (p.contains("drift_csv_points")) {
        // sampled drift exported as a plottable CSV grid
        GridSpec dg{b->dim(), jget(p, "drift_csv_half_width", 4.0),
                    static_cast<int>(jget_int(p, "drift_csv_points", 64)), Centering::cell};
        const auto field = drift::sample_drift(*b, dg);
        CsvTable tab;
        tab.name = "drift";
        tab.columns = {"x", "y", "z", "bx", "by", "bz"};
        for (std::size_t i = 0; i < dg.size(); ++i) {
            const Point x = dg.point_at(i);
            tab.add_row({fmt_double(x[0]), fmt_double(x[1]), fmt_double(x[2]),
                         fmt_double(field.at(i, 0)),
                         fmt_double(b->dim() > 1 ? field.at(i, 1) : 0.0),
                         fmt_double(b->dim() > 2 ? field.at(i, 2) : 0.0)});
        }
        rep.add_table(std::move(tab));
    }
    rep.add_check("all_paths_valid", ens.invalid_count() == 0);
    return rep;
}

ExperimentReport exp_particle_run(const json& p, std::uint64_t seed, const std::string& out_dir) {
    require_keys(p, {"zeta", "n", "dt", "steps", "blob_eps", "density_every", "density_points",
                     "density_half_width", "use_cell_list", "cutoff_radius"},
                 "particle-run");
    const MeasureSpec zeta = p.contains("zeta") ? parse_measure(p.at("zeta"), 2)
                                                : MeasureSpec::gaussian(2, {0, 0, 0}, 1.0);
    const std::size_t n = static_cast<std::size_t>(jget_int(p, "n", 4000));
    auto st = particles::init_particles(zeta, n, seed);
    particles::InteractionKernel kernel;
    kernel.eps = jget(p, "blob_eps", particles::default_blob_scale(n, 2));
    particles::StepConfig scfg;
    scfg.dt = jget(p, "dt", 0.01);
    scfg.seed = seed;
    scfg.use_cell_list = p.contains("use_cell_list") && p.at("use_cell_list").get<bool>();
    scfg.cutoff_radius = jget(p, "cutoff_radius", 0.0);
    const int steps = static_cast<int>(jget_int(p, "steps", 50));
    const int every = static_cast<int>(jget_int(p, "density_every", 10));

    std::vector<particles::ParticleState> frames{st};
    GridSpec dg{2, jget(p, "density_half_width", 8.0),
                static_cast<int>(jget_int(p, "density_points", 64)), Centering::cell};
    ExperimentReport rep("particle-run");
    const double w0 = st.weight_sum();
    for (int s = 0; s < steps; ++s) {
        st = particles::step_particles(st, kernel, scfg, static_cast<std::uint32_t>(s));
        if ((s + 1) % every == 0) frames.push_back(st);
    }
    particles::write_frames_bin((std::filesystem::path(out_dir) / "frames.bin").string(), frames);
    const auto dens = particles::empirical_density(st, dg, sde::DensityMethod::histogram);
    CsvTable dtab;
    dtab.name = "density";
    dtab.columns = {"x", "y", "value"};
    for (std::size_t i = 0; i < dens.cells(); ++i) {
        const Point x = dg.point_at(i);
        dtab.add_row({fmt_double(x[0]), fmt_double(x[1]), fmt_double(dens.at(i))});
    }
    rep.add_table(std::move(dtab));
    rep.add_exact("weight_sum_initial", w0);
    rep.add_exact("weight_sum_final", st.weight_sum());
    rep.add_check("weights_conserved", st.weight_sum() == w0);
    return rep;
}

ExperimentReport exp_fpe_run(const json& p, std::uint64_t, const std::string& out_dir) {
    require_keys(p, {"kernel", "drift", "zeta", "points", "half_width", "horizon", "dt",
                     "snapshot_every", "weighted_r"},
                 "fpe-run");
    fpe::SolveConfig cfg;
    cfg.grid.points = static_cast<int>(jget_int(p, "points", 256));
    cfg.grid.half_width = jget(p, "half_width", 12.0);
    cfg.dt = jget(p, "dt", 0.005);
    cfg.horizon = jget(p, "horizon", 0.5);
    cfg.weighted_r = jget(p, "weighted_r", 4.0 / 3.0);
    cfg.snapshot_every = static_cast<int>(jget_int(p, "snapshot_every", 20));
    const MeasureSpec zeta = p.contains("zeta") ? parse_measure(p.at("zeta"), 2)
                                                : MeasureSpec::gaussian(2, {0, 0, 0}, 0.8);
    fpe::DensityTrajectory traj;
    if (p.contains("drift")) {
        traj = fpe::solve_linear_fpe(parse_drift(p.at("drift")), zeta, cfg);
    } else {
        const std::string kernel = p.contains("kernel") ? p.at("kernel").get<std::string>() : "none";
        if (kernel == "none")
            traj = fpe::solve_nfpe(fpe::ConvolutionKernel::none, zeta, cfg);
        else if (kernel == "biot_savart")
            traj = fpe::solve_nfpe(fpe::ConvolutionKernel::biot_savart, zeta, cfg);
        else
            throw SchemaError("fpe-run: unknown kernel '" + kernel + "'");
    }
    // traj.bin: magic FPE1, points, half_width, final density row-major
    {
        std::ofstream f(std::filesystem::path(out_dir) / "traj.bin", std::ios::binary);
        const char magic[4] = {'F', 'P', 'E', '1'};
        f.write(magic, 4);
        const std::uint32_t m = static_cast<std::uint32_t>(cfg.grid.points);
        const double hw = cfg.grid.half_width;
        const double tfin = traj.final_time();
        f.write(reinterpret_cast<const char*>(&m), 4);
        f.write(reinterpret_cast<const char*>(&hw), 8);
        f.write(reinterpret_cast<const char*>(&tfin), 8);
        f.write(reinterpret_cast<const char*>(traj.final_density().raw().data()),
                static_cast<std::streamsize>(traj.final_density().raw().size() * sizeof(double)));
    }
    ExperimentReport rep("fpe-run");
    rep.add_table(traj.norm_table());
    rep.add_exact("mass_drift", traj.mass_drift());
    rep.add_exact("far_field_mass", traj.far_field_mass());
    rep.add_check("mass_conserved", traj.mass_drift() < 1e-12);
    return rep;
}

ExperimentReport exp_oseen(const json& p, std::uint64_t) {
    require_keys(p, {"points", "half_width", "dt", "sigma"}, "oseen-radial");
    fpe::SolveConfig cfg;
    cfg.grid.points = static_cast<int>(jget_int(p, "points", 512));
    cfg.grid.half_width = jget(p, "half_width", 16.0);
    cfg.dt = jget(p, "dt", 0.005);
    cfg.horizon = 1.0;
    const auto zeta = MeasureSpec::gaussian(2, {0, 0, 0}, jget(p, "sigma", 1.0));
    const auto t0 = std::chrono::steady_clock::now();
    cfg.snapshot_every = static_cast<int>(std::llround(0.25 / cfg.dt));
    auto traj = fpe::solve_nfpe(fpe::ConvolutionKernel::biot_savart, zeta, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto init = zeta.rasterize(cfg.grid.spec());
    ExperimentReport rep("oseen-radial");
    bool pass = true;
    for (double t : {0.25, 0.5, 1.0}) {
        const double l1 = l1_distance(traj.snapshot(t), fpe::heat_propagate(init, t));
        rep.add_exact("l1_vs_heat_t" + fmt_double(t), l1);
        pass = pass && l1 < 1e-5;
    }
    rep.add_check("radial_reduction", pass);
    rep.add_check("runtime_under_60s", wall < 60.0);
    rep.add_table(traj.norm_table());
    return rep;
}

ExperimentReport exp_particle_pde(const json& p, std::uint64_t seed) {
    require_keys(p, {"n_ladder", "seeds", "dt", "sigma", "t_end", "bandwidth"}, "particle-pde");
    std::vector<std::size_t> n_ladder{1000, 4000, 16000};
    if (p.contains("n_ladder")) {
        n_ladder.clear();
        for (const auto& v : p.at("n_ladder")) n_ladder.push_back(v.get<std::size_t>());
    }
    const int seeds = static_cast<int>(jget_int(p, "seeds", 8));
    const double dt = jget(p, "dt", 0.01);
    const double sigma = jget(p, "sigma", 1.0);
    const double t_end = jget(p, "t_end", 0.5);
    const auto zeta = MeasureSpec::gaussian(2, {0.5, 0.0, 0}, sigma);

    // PDE reference
    fpe::SolveConfig pcfg;
    pcfg.grid = {12.0, 256};
    pcfg.dt = 0.005;
    pcfg.horizon = t_end;
    auto traj = fpe::solve_nfpe(fpe::ConvolutionKernel::biot_savart, zeta, pcfg);

    GridSpec dg{2, 8.0, 64, Centering::cell};
    // resample the PDE density onto the comparison grid
    SampledField pde(dg, 1);
    for (std::size_t i = 0; i < dg.size(); ++i)
        pde.at(i) = traj.final_density().multilinear(dg.point_at(i));

    ExperimentReport rep("particle-pde");
    CsvTable table;
    table.name = "particle_pde";
    table.columns = {"n", "l1_distance"};
    std::vector<double> dist;
    const int steps = static_cast<int>(std::llround(t_end / dt));
    for (std::size_t n : n_ladder) {
        SampledField avg(dg, 1);
        const double bw = jget(p, "bandwidth", 0.0) > 0.0
                              ? jget(p, "bandwidth", 0.0)
                              : 1.4 * particles::default_blob_scale(n, 2);
        for (int s = 0; s < seeds; ++s) {
            auto st = particles::init_particles(zeta, n, seed + 1000 * s);
            particles::InteractionKernel k;
            k.eps = particles::default_blob_scale(n, 2);
            particles::StepConfig scfg;
            scfg.dt = dt;
            scfg.seed = seed + 1000 * s;
            for (int step = 0; step < steps; ++step)
                st = particles::step_particles(st, k, scfg, static_cast<std::uint32_t>(step));
            const auto f = particles::empirical_density(st, dg, sde::DensityMethod::kde, bw);
            for (std::size_t i = 0; i < f.cells(); ++i) avg.at(i) += f.at(i) / seeds;
        }
        const double l1 = l1_distance(avg, pde);
        dist.push_back(l1);
        table.add_row({std::to_string(n), fmt_double(l1)});
        rep.add_exact("l1_n" + std::to_string(n), l1);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < dist.size(); ++i) monotone = monotone && dist[i] <= dist[i - 1];
    rep.add_check("final_l1_below_0_05", dist.back() < 0.05);
    rep.add_check("monotone_in_n", monotone);
    rep.add_table(std::move(table));
    return rep;
}

ExperimentReport exp_verify_aronson(const json& p, std::uint64_t) {
    require_keys(p, {"levels", "t_probe", "points", "half_width", "dt"}, "verify-aronson");
    std::vector<int> levels{2, 4, 8};
    if (p.contains("levels")) {
        levels.clear();
        for (const auto& v : p.at("levels")) levels.push_back(v.get<int>());
    }
    fpe::SolveConfig cfg;
    cfg.grid.points = static_cast<int>(jget_int(p, "points", 512));
    cfg.grid.half_width = jget(p, "half_width", 16.0);
    cfg.dt = jget(p, "dt", 0.005);
    return verify::aronson_stability(levels, jget(p, "t_probe", 0.5), cfg);
}

ExperimentReport exp_verify_krylov(const json& p, std::uint64_t seed) {
    require_keys(p, {"levels", "paths", "dt", "f_family"}, "verify-krylov");
    verify::KrylovScanConfig cfg;
    if (p.contains("levels")) {
        cfg.levels.clear();
        for (const auto& v : p.at("levels")) cfg.levels.push_back(v.get<int>());
    }
    cfg.paths = static_cast<std::size_t>(jget_int(p, "paths", 20000));
    cfg.dt = jget(p, "dt", 2e-3);
    cfg.f_family = static_cast<int>(jget_int(p, "f_family", 12));
    cfg.seed = seed;
    cfg.exponents = {lorentz::KrylovIndex(2, 4.0, 4.0), lorentz::KrylovIndex(2, 3.0, 6.0),
                     lorentz::KrylovIndex(2, 6.0, 3.0)};
    const auto vort = MeasureSpec::gaussian(2, {0, 0, 0}, 1.0);
    const GridSpec table{2, 12.0, 512, Centering::node};
    std::vector<drift::DriftPtr> drifts;
    for (int n : cfg.levels)
        drifts.push_back(drift::mollify_drift(drift::blob_velocity_drift(vort, table, 0.0), n, table));
    return verify::krylov_scan(drifts, cfg);
}

ExperimentReport exp_verify_holder(const json& p, std::uint64_t seed) {
    require_keys(p, {"paths", "levels"}, "verify-holder");
    verify::HolderProbeConfig cfg;
    cfg.paths = static_cast<std::size_t>(jget_int(p, "paths", 20000));
    cfg.seed = seed;
    cfg.base = {0.7, 0.2, 0};
    GridSpec g{2, 10.0, 128, Centering::cell};
    std::vector<SampledField> frames;
    for (int k = 0; k <= 10; ++k)
        frames.push_back(SampledField::sample_scalar(g, [](const Point& x) {
            return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 3.0);
        }));
    SpaceTimeField f(0.0, 1.0, std::move(frames));

    ExperimentReport rep("verify-holder");
    std::vector<int> levels{2, 4, 8};
    if (p.contains("levels")) {
        levels.clear();
        for (const auto& v : p.at("levels")) levels.push_back(v.get<int>());
    }
    const auto vort = MeasureSpec::gaussian(2, {0, 0, 0}, 1.0);
    const GridSpec table{2, 12.0, 512, Centering::node};
    bool all_positive = true, any_inconclusive = false;
    CsvTable tab;
    tab.name = "holder";
    tab.columns = {"level", "alpha_hat", "log_C_hat", "pairs_used"};
    for (int n : levels) {
        auto bn = drift::mollify_drift(drift::blob_velocity_drift(vort, table, 0.0), n, table);
        const auto res = verify::holder_probe(bn, f, cfg);
        any_inconclusive = any_inconclusive || res.inconclusive;
        all_positive = all_positive && res.alpha_hat > 0.25;
        tab.add_row({std::to_string(n), fmt_double(res.alpha_hat), fmt_double(res.log_c_hat),
                     std::to_string(res.pairs_used)});
        rep.add_exact("alpha_hat_n" + std::to_string(n), res.alpha_hat);
    }
    rep.set_inconclusive(any_inconclusive);
    rep.add_check("slope_bounded_away_from_zero", all_positive && !any_inconclusive);
    rep.add_table(std::move(tab));
    return rep;
}

ExperimentReport exp_verify_decay(const json& p, std::uint64_t) {
    require_keys(p, {"r", "t_min", "t_max", "samples"}, "verify-decay");
    const double r = jget(p, "r", 4.0);
    const double tmin = jget(p, "t_min", 1e-3), tmax = jget(p, "t_max", 1e-1);
    const int ns = static_cast<int>(jget_int(p, "samples", 13));
    std::vector<double> tg;
    for (int i = 0; i < ns; ++i) tg.push_back(tmin * std::pow(tmax / tmin, i / double(ns - 1)));

    ExperimentReport rep("verify-decay");
    CsvTable tab;
    tab.name = "decay";
    tab.columns = {"t", "atom", "smooth"};
    const auto atom_rows = fpe::decay_diagnostic(MeasureSpec::delta(2), r, tg);
    const auto smooth_rows =
        fpe::decay_diagnostic(MeasureSpec::gaussian(2, {0, 0, 0}, 0.5), r, tg);
    double alo = 1e300, ahi = 0.0;
    for (std::size_t i = 0; i < tg.size(); ++i) {
        alo = std::min(alo, atom_rows[i].value);
        ahi = std::max(ahi, atom_rows[i].value);
        tab.add_row({fmt_double(tg[i]), fmt_double(atom_rows[i].value),
                     fmt_double(smooth_rows[i].value)});
    }
    rep.add_exact("atom_flatness", ahi / alo);
    rep.add_exact("smooth_decay_factor", smooth_rows.back().value / smooth_rows.front().value);
    rep.add_check("atom_flat_within_5pct", ahi / alo < 1.05);
    rep.add_check("smooth_decays_10x", smooth_rows.back().value >= 10.0 * smooth_rows.front().value);
    rep.add_table(std::move(tab));
    return rep;
}

ExperimentReport exp_verify_inequalities(const json& p, std::uint64_t seed) {
    require_keys(p, {"trials", "kinds", "resolution"}, "verify-inequalities");
    const int trials = static_cast<int>(jget_int(p, "trials", 200));
    std::vector<std::string> kinds{"holder", "young", "interpolation", "ladyzhenskaya",
                                   "gagliardo_nirenberg", "poincare"};
    if (p.contains("kinds")) {
        kinds.clear();
        for (const auto& v : p.at("kinds")) kinds.push_back(v.get<std::string>());
    }
    ExperimentReport rep("verify-inequalities");
    bool all = true;
    for (const auto& k : kinds) {
        auto sub = lorentz::inequality_suite(lorentz::inequality_kind_from_string(k), trials, seed);
        all = all && sub.all_pass();
        rep.merge_payload(k, sub.payload()["results"]["summary"]);
        for (auto& t : sub.tables()) rep.add_table(t);
        rep.add_check(k + "_pass", sub.all_pass());
    }
    rep.add_check("all_kinds_pass", all);
    return rep;
}

ExperimentReport exp_duhamel(const json& p, std::uint64_t) {
    require_keys(p, {"masses", "t0", "r", "iterations", "points", "half_width"}, "duhamel-contraction");
    fpe::DuhamelConfig cfg;
    cfg.t0 = jget(p, "t0", 0.25);
    cfg.r = jget(p, "r", 4.0 / 3.0);
    cfg.iterations = static_cast<int>(jget_int(p, "iterations", 8));
    cfg.grid.points = static_cast<int>(jget_int(p, "points", 256));
    cfg.grid.half_width = jget(p, "half_width", 12.0);
    std::vector<double> masses{0.05, 0.1, 0.2};
    if (p.contains("masses")) {
        masses.clear();
        for (const auto& v : p.at("masses")) masses.push_back(v.get<double>());
    }
    ExperimentReport rep("duhamel-contraction");
    CsvTable tab;
    tab.name = "duhamel";
    tab.columns = {"mass", "contraction_ratio", "diverged"};
    std::vector<double> ratios;
    for (double m : masses) {
        auto res = fpe::duhamel_picard(fpe::ConvolutionKernel::biot_savart,
                                       MeasureSpec::delta(2, {0, 0, 0}, m), cfg);
        ratios.push_back(res.contraction_ratio());
        tab.add_row({fmt_double(m), fmt_double(ratios.back()), res.diverged ? "1" : "0"});
        rep.add_exact("ratio_mass_" + fmt_double(m), ratios.back());
    }
    bool monotone = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) monotone = monotone && ratios[i] >= ratios[i - 1];
    rep.add_check("contracts_at_smallest_mass", ratios.front() < 1.0);
    rep.add_check("ratio_monotone_in_mass", monotone);
    rep.add_table(std::move(tab));
    return rep;
}

ExperimentReport exp_flow(const json& p, std::uint64_t) {
    require_keys(p, {"points", "half_width", "dt", "horizon", "r_mid", "sigma"}, "flow-property");
    fpe::SolveConfig cfg;
    cfg.grid.points = static_cast<int>(jget_int(p, "points", 256));
    cfg.grid.half_width = jget(p, "half_width", 12.0);
    cfg.dt = jget(p, "dt", 0.005);
    cfg.horizon = jget(p, "horizon", 0.5);
    cfg.snapshot_every = 10;
    // asymmetric data: a single off-center Gaussian is radial about its own
    // center and self-advects trivially, which would make the check vacuous
    MeasureSpec zeta;
    zeta.dim = 2;
    zeta.add_gaussian({0.8, 0.2, 0}, jget(p, "sigma", 0.7), 0.6);
    zeta.add_gaussian({-0.7, -0.4, 0}, 0.5 * jget(p, "sigma", 0.7) + 0.2, 0.4);
    return fpe::flow_property_check(fpe::ConvolutionKernel::biot_savart, zeta,
                                    jget(p, "r_mid", 0.25), cfg);
}

ExperimentReport exp_nonuniqueness(const json& p, std::uint64_t seed) {
    require_keys(p, {"paths", "pilot_paths", "deltas", "kappa", "horizon", "dt", "p", "d",
                     "gap_threshold"},
                 "nonuniqueness");
    verify::NonuniquenessConfig cfg;
    cfg.seed = seed;
    cfg.paths = static_cast<std::size_t>(jget_int(p, "paths", 200000));
    cfg.pilot_paths = static_cast<std::size_t>(jget_int(p, "pilot_paths", 4000));
    cfg.kappa = jget(p, "kappa", 1.2);
    cfg.horizon = jget(p, "horizon", 10.0);
    cfg.dt = jget(p, "dt", 0.01);
    cfg.p = jget(p, "p", 2.0);
    cfg.d = static_cast<int>(jget_int(p, "d", 3));
    cfg.gap_threshold = jget(p, "gap_threshold", 5.0);
    if (p.contains("deltas")) {
        cfg.delta_ladder.clear();
        for (const auto& v : p.at("deltas")) cfg.delta_ladder.push_back(v.get<double>());
    }
    return verify::nonuniqueness_experiment(cfg);
}

}  // namespace

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
    if (!obj.is_object()) throw SchemaError(context + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const auto& a : allowed) ok = ok || a == key;
        if (!ok) throw SchemaError(context + ": unknown key '" + key + "'");
    }
}

std::string config_hash(const json& config) { return content_hash(config.dump()); }

const std::vector<ExperimentInfo>& registry() {
    static const std::vector<ExperimentInfo> reg = {
        {"heat-sanity", "spectral heat evolution vs the analytic kernel", "params", "seconds"},
        {"brownian-baseline", "variance normalization of the sqrt(2) noise", "params", "< 30 s"},
        {"sde-run", "generic path simulation with stopping statistics", "params.drift", "varies"},
        {"particle-run", "interacting vortex-blob particle run", "params.zeta", "varies"},
        {"fpe-run", "linear or nonlinear Fokker-Planck solve", "params", "varies"},
        {"oseen-radial", "radial vorticity reduces to the heat flow", "params", "< 60 s"},
        {"particle-pde", "particle vs PDE density convergence ladder", "params", "minutes"},
        {"verify-aronson", "two-sided Gaussian sandwich stability in the mollification level",
         "params", "~1 min"},
        {"verify-krylov", "Krylov functional / mixed norm ratio scan", "params", "minutes"},
        {"verify-holder", "Feynman-Kac Holder probe", "params", "minutes"},
        {"verify-decay", "small-time decay of the heat extension", "params", "seconds"},
        {"verify-inequalities", "Appendix inequality stress suites", "params", "minutes"},
        {"duhamel-contraction", "mild-solution Picard contraction vs initial mass", "params",
         "~1 min"},
        {"flow-property", "restart consistency of the nonlinear solver", "params", "seconds"},
        {"nonuniqueness", "two-start supercritical cone experiment", "params", "< 20 min"},
    };
    return reg;
}

ExperimentReport run_experiment(const json& config, const std::string& out_dir) {
    require_keys(config, {"experiment", "seed", "workers", "out_dir", "params"}, "config");
    if (!config.contains("experiment") || !config.at("experiment").is_string())
        throw SchemaError("config: required string key 'experiment'");
    const std::string id = config.at("experiment").get<std::string>();
    const std::uint64_t seed =
        config.contains("seed") ? config.at("seed").get<std::uint64_t>() : 0;
    if (config.contains("workers")) {
        const int w = static_cast<int>(config.at("workers").get<std::int64_t>());
        if (w > 0) omp_set_num_threads(w);
    }
    const json params = config.contains("params") ? config.at("params") : json::object();

    if (id == "heat-sanity") return exp_heat_sanity(params, seed);
    if (id == "brownian-baseline") return exp_brownian_baseline(params, seed);
    if (id == "sde-run") return exp_sde_run(params, seed, out_dir);
    if (id == "particle-run") return exp_particle_run(params, seed, out_dir);
    if (id == "fpe-run") return exp_fpe_run(params, seed, out_dir);
    if (id == "oseen-radial") return exp_oseen(params, seed);
    if (id == "particle-pde") return exp_particle_pde(params, seed);
    if (id == "verify-aronson") return exp_verify_aronson(params, seed);
    if (id == "verify-krylov") return exp_verify_krylov(params, seed);
    if (id == "verify-holder") return exp_verify_holder(params, seed);
    if (id == "verify-decay") return exp_verify_decay(params, seed);
    if (id == "verify-inequalities") return exp_verify_inequalities(params, seed);
    if (id == "duhamel-contraction") return exp_duhamel(params, seed);
    if (id == "flow-property") return exp_flow(params, seed);
    if (id == "nonuniqueness") return exp_nonuniqueness(params, seed);
    throw SchemaError("config: unknown experiment '" + id + "'");
}

int run_config_file(const std::string& path, const std::string& out_dir_cli) {
    if (!std::filesystem::exists(path)) {
        std::fprintf(stderr, "error: config file not found: %s\n", path.c_str());
        return 66;
    }
    json config;
    {
        std::ifstream f(path);
        try {
            config = json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            // recover line/column from the byte offset for the diagnostic
            std::ifstream g(path);
            std::string text((std::istreambuf_iterator<char>(g)), std::istreambuf_iterator<char>());
            std::size_t line = 1, col = 1;
            for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
                if (text[i] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            std::fprintf(stderr, "error: malformed JSON at line %zu, column %zu: %s\n", line, col,
                         e.what());
            return 64;
        }
    }
    std::string out_dir = out_dir_cli;
    if (out_dir.empty())
        out_dir = config.contains("out_dir") ? config.at("out_dir").get<std::string>() : "out";

    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::filesystem::create_directories(out_dir);
        auto rep = run_experiment(config, out_dir);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.write(out_dir, config_hash(config), wall);
        std::printf("%s: %s\n", rep.experiment().c_str(),
                    rep.all_pass() ? "PASS" : (rep.inconclusive() ? "INCONCLUSIVE" : "FAIL"));
        if (rep.all_pass()) return 0;
        return rep.inconclusive() ? 2 : 1;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 64;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 66;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace sdelab::cli
