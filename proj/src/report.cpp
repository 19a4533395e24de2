#include "sdelab/report.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sdelab {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string content_hash(const std::string& payload) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string CsvTable::serialize() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out += columns[c];
        out += (c + 1 == columns.size()) ? '\n' : ',';
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            out += (c + 1 == row.size()) ? '\n' : ',';
        }
    }
    return out;
}

ExperimentReport::ExperimentReport(std::string experiment) : experiment_(std::move(experiment)) {}

void ExperimentReport::add_exact(const std::string& name, double value) {
    results_[name] = {{"value", value}, {"tag", "exact"}};
}

void ExperimentReport::add_estimate(const std::string& name, double value, double std_error,
                                    double ci_level) {
    const double z = (ci_level >= 0.99) ? 2.5758293035489004 : 1.959963984540054;
    results_[name] = {{"value", value},
                      {"std_error", std_error},
                      {"ci_level", ci_level},
                      {"ci", {value - z * std_error, value + z * std_error}},
                      {"tag", "estimate"}};
}

void ExperimentReport::add_check(const std::string& name, bool pass) {
    checks_.push_back({{"name", name}, {"pass", pass}});
}

void ExperimentReport::add_note(const std::string& name, const std::string& value) {
    notes_[name] = value;
}

void ExperimentReport::merge_payload(const std::string& key, const nlohmann::ordered_json& j) {
    results_[key] = j;
}

bool ExperimentReport::all_pass() const {
    for (const auto& c : checks_)
        if (!c.at("pass").get<bool>()) return false;
    return true;
}

nlohmann::ordered_json ExperimentReport::payload() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment_;
    j["results"] = results_;
    j["checks"] = checks_;
    if (!notes_.empty()) j["notes"] = notes_;
    j["all_pass"] = all_pass();
    j["inconclusive"] = inconclusive_;
    return j;
}

void ExperimentReport::write(const std::string& out_dir, const std::string& config_hash,
                             double wall_seconds) const {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    nlohmann::ordered_json j = payload();
    j["config_hash"] = config_hash;
    {
        std::ofstream f(fs::path(out_dir) / "report.json");
        f << j.dump(2) << '\n';
    }
    nlohmann::ordered_json info;
    info["experiment"] = experiment_;
    info["config_hash"] = config_hash;
    info["wall_seconds"] = wall_seconds;
    info["written_unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::system_clock::now().time_since_epoch())
                                  .count();
    {
        std::ofstream f(fs::path(out_dir) / "runinfo.json");
        f << info.dump(2) << '\n';
    }
    for (const auto& t : tables_) {
        std::ofstream f(fs::path(out_dir) / (t.name + ".csv"));
        f << t.serialize();
    }
}

}  // namespace sdelab
