#include "soler/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace soler {

using nlohmann::json;

bool RunConfig::has(const std::string& section, const std::string& key) const {
    return data.contains(section) && data[section].contains(key);
}

double RunConfig::num(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return data[section][key].get<double>();
}

int RunConfig::integer(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    return data[section][key].get<int>();
}

std::string RunConfig::str(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return data[section][key].get<std::string>();
}

std::vector<double> RunConfig::nums(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    for (const auto& v : data[section][key]) out.push_back(v.get<double>());
    return out;
}

namespace {

json parse_scalar(const std::string& raw, const std::string& origin, int lineno) {
    std::string t = raw;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    if (t.empty())
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty value");
    if (t == "true") return true;
    if (t == "false") return false;
    if (t.front() == '"' && t.back() == '"' && t.size() >= 2)
        return t.substr(1, t.size() - 2);
    if (t.front() == '[') {
        if (t.back() != ']')
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unclosed array");
        json arr = json::array();
        std::string body = t.substr(1, t.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ','))
            if (item.find_first_not_of(" \t") != std::string::npos)
                arr.push_back(parse_scalar(item, origin, lineno));
        return arr;
    }
    try {
        size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        if (v == static_cast<long long>(v) && t.find_first_of(".eE") == std::string::npos)
            return static_cast<long long>(v);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": cannot parse value '" +
                                 t + "'");
    }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    // JSON if it looks like JSON
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            cfg.data = json::parse(text);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(origin + ": JSON parse error: " + e.what());
        }
    } else {
        cfg.data = json::object();
        std::string section = "global";
        std::istringstream ss(text);
        std::string line;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos) continue;
            size_t b = line.find_last_not_of(" \t\r");
            line = line.substr(a, b - a + 1);
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                             ": malformed section header");
                section = line.substr(1, line.size() - 2);
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": expected 'key = value'");
            std::string key = line.substr(0, eq);
            while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back())))
                key.pop_back();
            if (key.empty())
                throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.data[section][key] = parse_scalar(line.substr(eq + 1), origin, lineno);
        }
    }
    cfg.seed = static_cast<unsigned>(cfg.integer("run", "seed", 1));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string config_hash(const json& data) {
    std::string dump = data.dump();  // keys are sorted by the ordered map
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

json file_header(const RunConfig& cfg) {
    json h;
    h["schema_version"] = kSchemaVersion;
    h["tool_version"] = kToolVersion;
    h["config_hash"] = config_hash(cfg.data);
    h["seed"] = cfg.seed;
    return h;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header_lines,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const std::string& h : header_lines) out << "# " << h << "\n";
    for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    out.precision(17);
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

std::vector<std::string> track_columns(const ModulationTrack& track) {
    std::vector<std::string> cols = {"t", "omega", "theta"};
    size_t nz = 0;
    for (const auto& z : track.zabs) nz = std::max(nz, z.size());
    for (size_t j = 0; j < nz; ++j) cols.push_back("abs_z" + std::to_string(j));
    cols.push_back("fnorm");
    cols.push_back("Q");
    cols.push_back("E");
    cols.push_back("valid");
    return cols;
}

std::vector<std::vector<double>> track_rows(const ModulationTrack& track) {
    std::vector<std::vector<double>> rows;
    size_t nz = 0;
    for (const auto& z : track.zabs) nz = std::max(nz, z.size());
    for (size_t i = 0; i < track.times.size(); ++i) {
        std::vector<double> row = {track.times[i], track.omega[i], track.theta[i]};
        for (size_t j = 0; j < nz; ++j)
            row.push_back(j < track.zabs[i].size() ? track.zabs[i][j] : 0.0);
        row.push_back(track.fnorm[i]);
        row.push_back(track.Q[i]);
        row.push_back(track.E[i]);
        row.push_back(track.valid[i] ? 1.0 : 0.0);
        rows.push_back(std::move(row));
    }
    return rows;
}

SolerModel model_from_config(const RunConfig& cfg) {
    double m = cfg.num("model", "m", 1.0);
    std::string g = cfg.str("model", "g", "cubic");
    if (g == "cubic") return SolerModel::cubic(m);
    if (g == "polynomial") {
        std::vector<double> c = cfg.nums("model", "coeffs");
        if (c.empty()) throw std::runtime_error("polynomial nonlinearity needs model.coeffs");
        return SolerModel::polynomial(m, c);
    }
    throw std::runtime_error("unknown nonlinearity kind: " + g);
}

RadialGrid grid_from_config(const RunConfig& cfg) {
    int N = cfg.integer("grid", "N", 300);
    double R = cfg.num("grid", "R_max", 30.0);
    if (N < 8 || R <= 0) throw std::runtime_error("grid.N or grid.R_max out of range");
    return RadialGrid::make_uniform(N, R);
}

}  // namespace soler
