#ifndef SDELAB_EXPERIMENTS_HPP
#define SDELAB_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "sdelab/report.hpp"

namespace sdelab::cli {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentInfo {
    std::string id;
    std::string summary;
    std::string config_block;     // name of the params block it reads
    std::string expected_runtime;
};

const std::vector<ExperimentInfo>& registry();

/// Validates the top-level config (unknown keys rejected) and dispatches to
/// the named experiment. Deterministic for a fixed config at any worker
/// count; timestamps only ever reach runinfo.json.
ExperimentReport run_experiment(const nlohmann::ordered_json& config,
                                const std::string& out_dir);

/// Full CLI semantics: 0 all pass, 2 inconclusive, 1 failed/error,
/// 64 schema violation, 66 missing resources.
int run_config_file(const std::string& path, const std::string& out_dir);

/// Exposed for tests: strict key checking and config hashing.
void require_keys(const nlohmann::ordered_json& obj, const std::vector<std::string>& allowed,
                  const std::string& context);
std::string config_hash(const nlohmann::ordered_json& config);

}  // namespace sdelab::cli

#endif
