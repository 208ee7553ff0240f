#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ips/identities.hpp"
#include "ips/indicator.hpp"

namespace ips {

// Probe needle given in a scenario file: either a tip with an entry angle or a polyline.
struct NeedleSpec {
    std::optional<Vec2> tip;
    double entry_angle = 0.0;
    std::vector<Vec2> vertices;

    Needle build(const Curve& domain) const;
};

struct RunConfig {
    std::string scenario_path;
    std::string command;
    Scenario scenario;
    MfsSettings mfs;
    int J = 48;
    std::optional<NeedleSpec> needle;
    ClassifyOptions classify;  // carries the needle parameters used by probe
    SuiteOptions suite;
    std::string out_dir = "out";
    std::uint64_t seed = 20240601;
    int threads = 1;

    // Range checks on every override; throws ConfigError.
    void validate() const;
};

// Scenario file (TOML). Unknown keys are rejected so typos do not pass silently.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);
// Full configuration including all defaults, in the same format.
std::string print_config(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// DN matrices

std::string dn_to_json(const DtNMatrix& M);
DtNMatrix dn_from_json(const std::string& text);
void write_dn(const std::string& path, const DtNMatrix& M);
DtNMatrix read_dn(const std::string& path);

// ---------------------------------------------------------------------------
// Outputs

std::string format_double(double v);  // 17 significant digits
std::string field_to_csv(const IndicatorField& field);
std::string identity_reports_json(const SuiteResult& res);
std::string summary_table(const SuiteResult& res);
std::string probe_report_json(const IndicatorField& field, const ClassifyOptions& opt,
                              const std::optional<FieldScore>& score, const std::string& fingerprint);
std::string needle_dump_json(const std::vector<NeedleFunction>& members);
std::string timing_json(const std::vector<std::pair<std::string, double>>& phases);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace ips
