#include "sdelab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "sdelab/rng.hpp"

namespace sdelab::sde {

namespace {

constexpr std::uint32_t kInitStep = 0xFFFFFFFFu;

double cone_gap(const Point& x, int d) {
    // positive inside C_1 = { |x_hat| < x_d }
    double r2 = 0.0;
    for (int a = 0; a < d - 1; ++a) r2 += x[a] * x[a];
    return x[d - 1] - std::sqrt(r2);
}

double sgn_cutoff(const Point& x, int d) {
    const double xd = x[d - 1];
    const double g = kernels::Cutoff::g(std::abs(xd));
    return xd >= 0.0 ? g : -g;
}

Point sample_init(const InitSpec& init, int d, const CounterRng& rng) {
    if (std::holds_alternative<Point>(init)) return std::get<Point>(init);
    const MeasureSpec& law = std::get<MeasureSpec>(init);
    double total = 0.0;
    for (const auto& p : law.parts) {
        if (p.mass < 0.0)
            throw std::invalid_argument("simulate: initial law must be a positive measure");
        total += p.mass;
    }
    if (total <= 0.0) throw std::invalid_argument("simulate: initial law has zero mass");
    double u = rng.uniform(kInitStep, 0, 8) * total;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < law.parts.size(); ++i) {
        u -= law.parts[i].mass;
        if (u <= 0.0) {
            pick = i;
            break;
        }
        pick = i;
    }
    const auto& comp = law.parts[pick];
    Point x = comp.center;
    if (comp.kind == MeasureSpec::Component::Kind::gaussian)
        for (int a = 0; a < d; ++a) x[a] += comp.scale * rng.normal(kInitStep, 1, static_cast<std::uint32_t>(a));
    return x;
}

struct CrossingState {
    bool have_tau_bar = false, have_tau = false, have_sigma0 = false, have_sigma1 = false;
};

}  // namespace

void SdeConfig::validate() const {
    if (!(start_time >= 0.0) || !(horizon > start_time))
        throw std::invalid_argument("SdeConfig: need 0 <= s < T");
    if (!(dt > 0.0)) throw std::invalid_argument("SdeConfig: dt > 0");
    if (paths < 1) throw std::invalid_argument("SdeConfig: paths >= 1");
    const double span = horizon - start_time;
    const double k = std::round(span / dt);
    if (std::abs(k * dt - span) > 1e-12)
        throw std::invalid_argument("SdeConfig: K dt must equal T - s within 1e-12");
    if (store_frames < 2) throw std::invalid_argument("SdeConfig: store at least both endpoints");
}

std::size_t SdeConfig::steps() const {
    return static_cast<std::size_t>(std::llround((horizon - start_time) / dt));
}

double SdeConfig::step_of_frame(int frame) const {
    const std::size_t k = steps();
    const int frames = std::min<std::size_t>(store_frames, k + 1);
    return std::round(static_cast<double>(k) * frame / (frames - 1));
}

Point PathEnsemble::state(std::size_t p, std::size_t f) const {
    Point x{0.0, 0.0, 0.0};
    const std::size_t base = (p * frames() + f) * static_cast<std::size_t>(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = states_[base + static_cast<std::size_t>(a)];
    return x;
}

std::size_t PathEnsemble::valid_count() const {
    std::size_t n = 0;
    for (auto v : valid_) n += v;
    return n;
}

std::size_t PathEnsemble::frame_nearest(double t, double tol) const {
    std::size_t best = 0;
    double dist = std::abs(times_[0] - t);
    for (std::size_t f = 1; f < times_.size(); ++f) {
        const double d = std::abs(times_[f] - t);
        if (d < dist) {
            dist = d;
            best = f;
        }
    }
    if (dist > tol) throw std::invalid_argument("PathEnsemble: t is not on the stored time grid");
    return best;
}

void PathEnsemble::write_paths_bin(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_paths_bin: cannot open " + path);
    const char magic[4] = {'S', 'D', 'E', '1'};
    f.write(magic, 4);
    const std::uint32_t d = static_cast<std::uint32_t>(dim_);
    const std::uint64_t m = paths();
    const std::uint64_t k = frames() - 1;
    const double dt = (times_.back() - times_.front()) / static_cast<double>(k);
    const double s = times_.front();
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(&m), 8);
    f.write(reinterpret_cast<const char*>(&k), 8);
    f.write(reinterpret_cast<const char*>(&dt), 8);
    f.write(reinterpret_cast<const char*>(&s), 8);
    f.write(reinterpret_cast<const char*>(states_.data()),
            static_cast<std::streamsize>(states_.size() * sizeof(double)));
}

PathEnsemble simulate(const drift::DriftPtr& b, const InitSpec& init, const SdeConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(b->sup_bound()))
        throw std::invalid_argument(
            "simulate: raw singular drift rejected; use a mollified or blob-regularized drift");
    if (!cfg.adaptive_substeps && cfg.regularization_eps > 0.0) {
        const double guard = 0.1 * cfg.regularization_eps / b->sup_bound();
        if (cfg.dt > guard) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "simulate: dt violates the stability guard; need dt <= %.3g "
                          "(0.1 eps / sup|b|) or adaptive_substeps",
                          guard);
            throw std::invalid_argument(msg);
        }
    }

    const int d = b->dim();
    const std::size_t steps = cfg.steps();
    const std::size_t n_frames = std::min<std::size_t>(cfg.store_frames, steps + 1);

    PathEnsemble ens;
    ens.config_ = cfg;
    ens.dim_ = d;
    ens.times_.resize(n_frames);
    std::vector<std::size_t> frame_step(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        frame_step[f] =
            static_cast<std::size_t>(std::llround(static_cast<double>(steps) * f / (n_frames - 1)));
        ens.times_[f] = cfg.start_time + cfg.dt * static_cast<double>(frame_step[f]);
    }
    ens.states_.assign(cfg.paths * n_frames * static_cast<std::size_t>(d), 0.0);
    ens.valid_.assign(cfg.paths, 1);
    if (cfg.track_stopping) ens.stopping_.resize(cfg.paths);
    if (cfg.track_exp_functional) ens.exp_functional_.assign(cfg.paths, 0.0);

    const auto singulars = b->singular_points();
    const double sup_b = b->sup_bound();

#pragma omp parallel for schedule(dynamic, 64)
    for (long long pp = 0; pp < static_cast<long long>(cfg.paths); ++pp) {
        const std::size_t p = static_cast<std::size_t>(pp);
        const CounterRng rng(cfg.master_seed, cfg.stream, static_cast<std::uint32_t>(p));
        Point x = sample_init(init, d, rng);

        StoppingRecord rec;
        CrossingState cs;
        const bool stop_track = cfg.track_stopping;
        if (stop_track) {
            if (cone_gap(x, d) <= 0.0) {
                rec.tau = 0.0;
                cs.have_tau = true;
            }
            if (cone_gap(x, d) <= 0.0 || x[d - 1] >= 2.0) {
                rec.tau_bar = 0.0;
                cs.have_tau_bar = true;
            }
            if (x[d - 1] == 0.0) {
                rec.sigma0 = 0.0;
                cs.have_sigma0 = true;
            }
        }

        double exp_acc = 0.0;
        double w_prev = cfg.track_exp_functional
                            ? std::exp(-(cfg.start_time)) * sgn_cutoff(x, d)
                            : 0.0;

        // store frame 0
        std::size_t next_frame = 0;
        auto store = [&](std::size_t f) {
            const std::size_t base = (p * n_frames + f) * static_cast<std::size_t>(d);
            for (int a = 0; a < d; ++a) ens.states_[base + static_cast<std::size_t>(a)] = x[a];
        };
        store(0);
        next_frame = 1;

        bool ok = true;
        double t = cfg.start_time;
        for (std::size_t k = 0; k < steps && ok; ++k) {
            double remaining = cfg.dt;
            std::uint32_t sub = 0;
            while (remaining > 1e-15 * cfg.dt) {
                if (sub >= static_cast<std::uint32_t>(cfg.max_substeps_per_step)) {
                    ok = false;
                    break;
                }
                Point bx{0.0, 0.0, 0.0};
                try {
                    bx = b->eval(t, x);
                } catch (const drift::SingularPointError&) {
                    ok = false;
                    break;
                }
                double bn = 0.0;
                for (int a = 0; a < d; ++a) bn += bx[a] * bx[a];
                bn = std::sqrt(bn);

                double dt_loc = remaining;
                if (cfg.adaptive_substeps && bn > 0.0 && !singulars.empty()) {
                    double dist2 = std::numeric_limits<double>::infinity();
                    for (const auto& sPt : singulars) {
                        double r2 = 0.0;
                        for (int a = 0; a < d; ++a) r2 += (x[a] - sPt[a]) * (x[a] - sPt[a]);
                        dist2 = std::min(dist2, r2);
                    }
                    const double scale = cfg.regularization_eps + std::sqrt(dist2);
                    dt_loc = std::min(dt_loc, std::max(0.1 * scale / bn, cfg.dt * 1e-5));
                }

                const double root = kNoiseScale * std::sqrt(dt_loc);
                Point xn = x;
                double noise2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double xi =
                        rng.normal(static_cast<std::uint32_t>(k), sub, static_cast<std::uint32_t>(a));
                    const double inc = root * xi;
                    xn[a] = x[a] + bx[a] * dt_loc + inc;
                    noise2 += inc * inc;
                }
                const double t_next = t + dt_loc;

                if (stop_track) {
                    rec.max_noise_increment = std::max(rec.max_noise_increment, std::sqrt(noise2));
                    // crossing detection with linear interpolation of the level functions
                    const double g0 = cone_gap(x, d), g1 = cone_gap(xn, d);
                    if (!cs.have_tau && g1 <= 0.0) {
                        const double th = (g0 - g1) > 0.0 ? g0 / (g0 - g1) : 1.0;
                        rec.tau = (t - cfg.start_time) + th * dt_loc;
                        cs.have_tau = true;
                    }
                    if (!cs.have_tau_bar) {
                        const double f0 = std::min(g0, 2.0 - x[d - 1]);
                        const double f1 = std::min(g1, 2.0 - xn[d - 1]);
                        if (f1 <= 0.0) {
                            const double th = (f0 - f1) > 0.0 ? f0 / (f0 - f1) : 1.0;
                            rec.tau_bar = (t - cfg.start_time) + th * dt_loc;
                            cs.have_tau_bar = true;
                        }
                    }
                    if (!cs.have_sigma0 && ((x[d - 1] > 0.0) != (xn[d - 1] > 0.0))) {
                        const double th = x[d - 1] / (x[d - 1] - xn[d - 1]);
                        rec.sigma0 = (t - cfg.start_time) + th * dt_loc;
                        cs.have_sigma0 = true;
                    }
                    if (cs.have_tau_bar && !cs.have_sigma1) {
                        const double a0 = x[d - 1] - 1.0, a1 = xn[d - 1] - 1.0;
                        if ((t - cfg.start_time) >= *rec.tau_bar && (a0 > 0.0) != (a1 > 0.0)) {
                            const double th = a0 / (a0 - a1);
                            const double tc = (t - cfg.start_time) + th * dt_loc;
                            if (tc > *rec.tau_bar) {
                                rec.sigma1 = tc;
                                cs.have_sigma1 = true;
                            }
                        }
                    }
                }

                if (cfg.track_exp_functional) {
                    const double w = std::exp(-t_next) * sgn_cutoff(xn, d);
                    exp_acc += 0.5 * (w_prev + w) * dt_loc;
                    w_prev = w;
                }

                x = xn;
                t = t_next;
                remaining -= dt_loc;
                ++sub;
                for (int a = 0; a < d; ++a)
                    if (!std::isfinite(x[a])) ok = false;
                if (!ok) break;
            }
            t = cfg.start_time + cfg.dt * static_cast<double>(k + 1);  // avoid drift of t
            if (next_frame < n_frames && frame_step[next_frame] == k + 1) {
                store(next_frame);
                ++next_frame;
            }
        }

        if (!ok) {
            ens.valid_[p] = 0;
            // freeze remaining frames at the last state for well-defined storage
            for (std::size_t f = next_frame; f < n_frames; ++f) store(f);
        }
        if (stop_track) ens.stopping_[p] = rec;
        if (cfg.track_exp_functional) ens.exp_functional_[p] = exp_acc;
        (void)sup_b;
    }
    return ens;
}

Estimate krylov_functional(const PathEnsemble& ens, const SpaceTimeField& f,
                           const SpaceTimeField* c, double delta, std::size_t* coverage_warnings) {
    const std::size_t n = ens.frames();
    const double s = ens.config().start_time;
    std::size_t outside = 0;
    double sum = 0.0, sum2 = 0.0;
    std::size_t used = 0;
    for (std::size_t p = 0; p < ens.paths(); ++p) {
        if (!ens.valid(p)) continue;
        double acc = 0.0;
        double cint = 0.0;  // int_s^t c along the path
        double prev_val = 0.0, prev_t = 0.0;
        bool first = true;
        double prev_c = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = ens.frame_time(k);
            const Point x = ens.state(p, k);
            const double cv = c ? c->value(t, x) : 0.0;
            if (!first && c) cint += 0.5 * (prev_c + cv) * (t - prev_t);
            prev_c = cv;
            double fv = f.value(t, x);
            for (int a = 0; a < ens.dim(); ++a)
                if (std::abs(x[a]) > f.frame(0).grid().half_width) {
                    ++outside;
                    break;
                }
            const double w = std::exp(-cint) * fv;
            if (!first && t > s + delta) {
                const double t0 = std::max(prev_t, s + delta);
                acc += 0.5 * (prev_val + w) * (t - t0);
            }
            prev_val = w;
            prev_t = t;
            first = false;
        }
        sum += acc;
        sum2 += acc * acc;
        ++used;
    }
    if (coverage_warnings) *coverage_warnings = outside;
    if (used == 0) return {0.0, 0.0};
    const double mean = sum / static_cast<double>(used);
    const double var = std::max(0.0, sum2 / static_cast<double>(used) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(used))};
}

TFunctional t_functional(const PathEnsemble& ens, double horizon) {
    TFunctional out;
    out.truncation_bound = std::exp(-horizon);
    double sum = 0.0, sum2 = 0.0;
    std::size_t used = 0;
    if (!ens.exp_functional().empty()) {
        for (std::size_t p = 0; p < ens.paths(); ++p) {
            if (!ens.valid(p)) continue;
            const double v = ens.exp_functional()[p];
            sum += v;
            sum2 += v * v;
            ++used;
        }
    } else {
        const int d = ens.dim();
        for (std::size_t p = 0; p < ens.paths(); ++p) {
            if (!ens.valid(p)) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < ens.frames(); ++k) {
                const double t0 = ens.frame_time(k), t1 = ens.frame_time(k + 1);
                if (t0 >= horizon) break;
                const double w0 = std::exp(-t0) * sgn_cutoff(ens.state(p, k), d);
                const double w1 = std::exp(-t1) * sgn_cutoff(ens.state(p, k + 1), d);
                acc += 0.5 * (w0 + w1) * (t1 - t0);
            }
            sum += acc;
            sum2 += acc * acc;
            ++used;
        }
    }
    if (used == 0) return out;
    const double mean = sum / static_cast<double>(used);
    const double var = std::max(0.0, sum2 / static_cast<double>(used) - mean * mean);
    out.estimate = {mean, std::sqrt(var / static_cast<double>(used))};
    return out;
}

void wilson_interval(std::size_t successes, std::size_t n, double z, double& lo, double& hi) {
    if (n == 0) {
        lo = 0.0;
        hi = 1.0;
        return;
    }
    const double phat = static_cast<double>(successes) / static_cast<double>(n);
    const double z2n = z * z / static_cast<double>(n);
    const double denom = 1.0 + z2n;
    const double center = phat + z2n / 2.0;
    const double rad = z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n) + z2n / (4.0 * n));
    lo = std::max(0.0, (center - rad) / denom);
    hi = std::min(1.0, (center + rad) / denom);
}

ExperimentReport cone_statistics(const PathEnsemble& ens, double kappa, double ci_level) {
    if (!(kappa > 1.0))
        throw std::invalid_argument("cone_statistics: kappa must exceed 1 (paper cone opening)");
    if (ens.stopping().empty())
        throw std::invalid_argument("cone_statistics: ensemble simulated without stopping records");

    ExperimentReport rep("cone-statistics");
    std::size_t events = 0, used = 0;
    std::size_t tau_bar_fired = 0, tau_fired = 0, sigma0_fired = 0, sigma1_fired = 0;
    double mean_tau_bar = 0.0;
    double max_modulus = 0.0;
    for (std::size_t p = 0; p < ens.paths(); ++p) {
        if (!ens.valid(p)) continue;
        const auto& r = ens.stopping()[p];
        ++used;
        max_modulus = std::max(max_modulus, r.max_noise_increment);
        if (r.tau_bar) {
            ++tau_bar_fired;
            mean_tau_bar += *r.tau_bar;
        }
        if (r.tau) ++tau_fired;
        if (r.sigma0) ++sigma0_fired;
        if (r.sigma1) ++sigma1_fired;
        // tau_bar <= tau is a structural invariant (cone nesting)
        const double tau = r.tau ? *r.tau : std::numeric_limits<double>::infinity();
        if (r.tau_bar && *r.tau_bar < std::min(1.0, tau)) {
            const double sigma1 = r.sigma1 ? *r.sigma1 : std::numeric_limits<double>::infinity();
            if (sigma1 > 1.0 + *r.tau_bar) ++events;
        }
    }
    const double z = (ci_level >= 0.99) ? 2.5758293035489004 : 1.959963984540054;
    double lo, hi;
    wilson_interval(events, used, z, lo, hi);
    const double phat = used ? static_cast<double>(events) / static_cast<double>(used) : 0.0;
    rep.add_exact("paths_used", static_cast<double>(used));
    rep.add_estimate("event_probability", phat,
                     used ? std::sqrt(std::max(phat * (1 - phat), 1e-12) / used) : 0.0, ci_level);
    nlohmann::ordered_json wilson;
    wilson["lo"] = lo;
    wilson["hi"] = hi;
    wilson["level"] = ci_level;
    rep.merge_payload("wilson", wilson);
    rep.add_exact("tau_bar_fraction", used ? double(tau_bar_fired) / used : 0.0);
    rep.add_exact("tau_fraction", used ? double(tau_fired) / used : 0.0);
    rep.add_exact("sigma0_fraction", used ? double(sigma0_fired) / used : 0.0);
    rep.add_exact("sigma1_fraction", used ? double(sigma1_fired) / used : 0.0);
    rep.add_exact("mean_tau_bar", tau_bar_fired ? mean_tau_bar / tau_bar_fired : 0.0);
    rep.add_exact("max_noise_increment", max_modulus);
    rep.add_exact("kappa", kappa);
    return rep;
}

SampledField transition_density(const PathEnsemble& ens, double t, const GridSpec& grid,
                                DensityMethod method, double bandwidth, std::string* warning) {
    const std::size_t f = ens.frame_nearest(t, ens.config().dt * 0.51);
    const int d = ens.dim();
    if (grid.dim != d) throw std::invalid_argument("transition_density: grid dimension mismatch");
    SampledField out(grid, 1);
    const double h = grid.spacing();
    const double cell = grid.cell_measure();
    const double invm = 1.0 / static_cast<double>(ens.paths());

    double bw = bandwidth;
    if (method == DensityMethod::kde) {
        if (bw < 0.5 * h) {
            bw = 0.5 * h;
            if (warning) *warning = "kde bandwidth below the grid resolution; widened to half a cell";
        }
    }

    const double off = (grid.centering == Centering::cell) ? 0.5 : 0.0;
    auto cell_index = [&](double v) {
        int i = static_cast<int>(std::floor((v + grid.half_width) / h - off + 0.5));
        return std::clamp(i, 0, grid.points - 1);
    };

    for (std::size_t p = 0; p < ens.paths(); ++p) {
        if (!ens.valid(p)) continue;
        const Point x = ens.state(p, f);
        if (method == DensityMethod::histogram) {
            std::array<int, 3> idx{0, 0, 0};
            for (int a = 0; a < d; ++a) idx[a] = cell_index(x[a]);
            out.at(grid.flatten(idx)) += invm / cell;
        } else {
            // truncated Gaussian, renormalized on the grid so each path
            // deposits exactly 1/M of mass
            const double rad = 4.0 * bw;
            std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
            for (int a = 0; a < d; ++a) {
                lo[a] = std::clamp(static_cast<int>(std::floor((x[a] - rad + grid.half_width) / h - off)), 0,
                                   grid.points - 1);
                hi[a] = std::clamp(static_cast<int>(std::ceil((x[a] + rad + grid.half_width) / h - off)), 0,
                                   grid.points - 1);
            }
            std::vector<std::pair<std::size_t, double>> patch;
            double tot = 0.0;
            std::array<int, 3> idx = lo;
            while (true) {
                double r2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double xa = -grid.half_width + (idx[a] + off) * h;
                    r2 += (xa - x[a]) * (xa - x[a]);
                }
                const double w = std::exp(-r2 / (2.0 * bw * bw));
                if (w > 0.0) {
                    patch.emplace_back(grid.flatten(idx), w);
                    tot += w;
                }
                int a = d - 1;
                while (a >= 0) {
                    if (++idx[a] <= hi[a]) break;
                    idx[a] = lo[a];
                    --a;
                }
                if (a < 0) break;
            }
            if (tot > 0.0)
                for (const auto& [flat, w] : patch) out.at(flat) += invm * w / (tot * cell);
        }
    }
    return out;
}

}  // namespace sdelab::sde
