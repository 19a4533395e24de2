#include <CLI11.hpp>

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sdelab/experiments.hpp"

namespace {

// wrap a named experiment around an optional user config and run it through
// the standard report pipeline
int run_named(const std::string& experiment, const std::string& config_path,
              const std::string& out_dir) {
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    if (!config_path.empty()) {
        if (!std::filesystem::exists(config_path)) {
            std::fprintf(stderr, "error: config file not found: %s\n", config_path.c_str());
            return 66;
        }
        std::ifstream f(config_path);
        try {
            cfg = nlohmann::ordered_json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            std::fprintf(stderr, "error: malformed JSON: %s\n", e.what());
            return 64;
        }
    }
    if (!cfg.contains("experiment")) cfg["experiment"] = experiment;
    const std::string dir = out_dir.empty() ? "out" : out_dir;
    std::filesystem::create_directories(dir);
    const auto tmp = std::filesystem::path(dir) / ".sdelab_run.json";
    {
        std::ofstream f(tmp);
        f << cfg.dump(2);
    }
    const int rc = sdelab::cli::run_config_file(tmp.string(), dir);
    std::filesystem::remove(tmp);
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("SDL_LAB_THREADS")) {
        const int w = std::atoi(threads);
        if (w > 0) omp_set_num_threads(w);
    }

    CLI::App app{"numerical laboratory for singular-drift SDEs, vortex particle systems, and "
                 "Fokker-Planck solvers"};
    app.require_subcommand(1);

    std::string config, out_dir, verify_kind;
    bool list_json = false;

    auto add_io = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config, "JSON run configuration");
        if (config_required) opt->required();
        sub->add_option("--out-dir", out_dir, "output directory (default: out)");
    };

    auto* run = app.add_subcommand("run", "run an experiment described by a config file");
    add_io(run, true);
    auto* ssde = app.add_subcommand("simulate-sde", "Monte Carlo paths of the SDE");
    add_io(ssde, false);
    ssde->add_option("--out", out_dir, "alias of --out-dir; paths.bin lands there");
    auto* spart = app.add_subcommand("simulate-particles", "interacting vortex-blob particles");
    add_io(spart, false);
    auto* sfpe = app.add_subcommand("solve-fpe", "pseudospectral Fokker-Planck solve");
    add_io(sfpe, false);
    auto* ver = app.add_subcommand("verify", "estimate verifiers");
    ver->add_option("kind", verify_kind, "aronson|krylov|holder|decay|inequalities")->required();
    add_io(ver, false);
    auto* nonuniq = app.add_subcommand("nonuniqueness", "two-start supercritical experiment");
    add_io(nonuniq, false);
    auto* list = app.add_subcommand("list", "registered experiments");
    list->add_flag("--json", list_json, "machine readable registry");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        if (list_json) {
            nlohmann::ordered_json out = nlohmann::ordered_json::array();
            for (const auto& e : sdelab::cli::registry())
                out.push_back({{"id", e.id},
                               {"summary", e.summary},
                               {"config_block", e.config_block},
                               {"expected_runtime", e.expected_runtime}});
            std::printf("%s\n", out.dump(2).c_str());
        } else {
            for (const auto& e : sdelab::cli::registry())
                std::printf("%-22s %-12s %s\n", e.id.c_str(), e.expected_runtime.c_str(),
                            e.summary.c_str());
        }
        return 0;
    }
    if (run->parsed()) return sdelab::cli::run_config_file(config, out_dir);
    if (ssde->parsed()) return run_named("sde-run", config, out_dir);
    if (spart->parsed()) return run_named("particle-run", config, out_dir);
    if (sfpe->parsed()) return run_named("fpe-run", config, out_dir);
    if (nonuniq->parsed()) return run_named("nonuniqueness", config, out_dir);
    if (ver->parsed()) {
        if (verify_kind != "aronson" && verify_kind != "krylov" && verify_kind != "holder" &&
            verify_kind != "decay" && verify_kind != "inequalities") {
            std::fprintf(stderr, "error: unknown verify kind '%s'\n", verify_kind.c_str());
            return 64;
        }
        return run_named("verify-" + verify_kind, config, out_dir);
    }
    return 64;
}
