#ifndef SDELAB_REPORT_HPP
#define SDELAB_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace sdelab {

/// Deterministic double formatting used in every CSV payload.
std::string fmt_double(double v);

/// FNV-1a hash of a string, hex-encoded; used as the config content hash.
std::string content_hash(const std::string& payload);

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
    std::string serialize() const;
};

/// Structured experiment result. Every numeric entry is tagged exact or
/// carries a confidence interval, and pass/fail checks gate the CLI exit
/// code. Timestamps never enter this payload; they live in a separate
/// run-info block so identical configs produce byte-identical files.
class ExperimentReport {
public:
    explicit ExperimentReport(std::string experiment = "");

    const std::string& experiment() const { return experiment_; }

    void add_exact(const std::string& name, double value);
    void add_estimate(const std::string& name, double value, double std_error,
                      double ci_level = 0.99);
    void add_check(const std::string& name, bool pass);
    void add_note(const std::string& name, const std::string& value);
    void set_inconclusive(bool v) { inconclusive_ = v; }
    void merge_payload(const std::string& key, const nlohmann::ordered_json& j);

    void add_table(CsvTable t) { tables_.push_back(std::move(t)); }
    const std::vector<CsvTable>& tables() const { return tables_; }

    bool all_pass() const;
    bool inconclusive() const { return inconclusive_; }

    nlohmann::ordered_json payload() const;

    /// Writes <out_dir>/report.json, per-table CSVs, and runinfo.json
    /// (timestamps and wall time isolated there).
    void write(const std::string& out_dir, const std::string& config_hash,
               double wall_seconds) const;

private:
    std::string experiment_;
    nlohmann::ordered_json results_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json checks_ = nlohmann::ordered_json::array();
    nlohmann::ordered_json notes_ = nlohmann::ordered_json::object();
    std::vector<CsvTable> tables_;
    bool inconclusive_ = false;
};

}  // namespace sdelab

#endif
