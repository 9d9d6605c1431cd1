#pragma once
#include <json.hpp>

#include <string>
#include <vector>

#include "soler/dynamics.hpp"

namespace soler {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Run configuration: a flat two-level section/key tree.  Loadable from JSON
// or from a minimal TOML-style text ([section] headers, key = value lines,
// strings, numbers, booleans and [a, b, ...] arrays).
struct RunConfig {
    nlohmann::json data;  // sections -> key/value objects
    unsigned seed = 1;

    bool has(const std::string& section, const std::string& key) const;
    double num(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key, int fallback) const;
    std::string str(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::vector<double> nums(const std::string& section, const std::string& key) const;
};

// throws std::runtime_error with a line-numbered diagnostic on parse failure
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// stable content hash of the configuration (canonical JSON dump, FNV-1a)
std::string config_hash(const nlohmann::json& data);

// standard header block carried by every emitted file
nlohmann::json file_header(const RunConfig& cfg);

void write_json_file(const std::string& path, const nlohmann::json& j);

// CSV with '#'-prefixed header lines (version, config hash, seed, manifest)
void write_csv_file(const std::string& path, const std::vector<std::string>& header_lines,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows);

// ModulationTrack serialization: t, omega, theta, |z_j|..., fnorm, Q, E, valid
std::vector<std::string> track_columns(const ModulationTrack& track);
std::vector<std::vector<double>> track_rows(const ModulationTrack& track);

SolerModel model_from_config(const RunConfig& cfg);     // [model] m, g, coeffs
RadialGrid grid_from_config(const RunConfig& cfg);      // [grid] N, R_max

}  // namespace soler
