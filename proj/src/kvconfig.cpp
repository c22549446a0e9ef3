// SPDX-License-Identifier: Apache-2.0

#include "ddarec/kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dda {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
} // namespace

KvMap parse_kv_text(std::istream& is) {
    KvMap m;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = trim(line);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        m[key] = val;
    }
    return m;
}

KvMap parse_kv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    return parse_kv_text(is);
}

double kv_get_double(const KvMap& m, const std::string& key, double fallback) {
    auto it = m.find(key);
    if (it == m.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::runtime_error("config key " + key + ": not a number: " + it->second);
    }
}

int kv_get_int(const KvMap& m, const std::string& key, int fallback) {
    auto it = m.find(key);
    if (it == m.end()) return fallback;
    try {
        size_t pos = 0;
        const int v = std::stoi(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::runtime_error("config key " + key + ": not an integer: " + it->second);
    }
}

std::string kv_get_string(const KvMap& m, const std::string& key, const std::string& fallback) {
    auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

void config_to_kv(const SystemConfig& cfg, KvMap& m) {
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    m["system.n_v"] = std::to_string(cfg.n_v);
    m["system.n_h"] = std::to_string(cfg.n_h);
    m["system.n_pol"] = std::to_string(cfg.n_pol);
    m["system.n_f"] = std::to_string(cfg.n_f);
    m["system.delta_f"] = num(cfg.delta_f);
    m["system.t_w"] = std::to_string(cfg.t_w);
    m["system.delta_t"] = num(cfg.delta_t);
    m["system.carrier_freq"] = num(cfg.carrier_freq);
    m["system.pilot_block"] = std::to_string(cfg.pilot_block);
}

SystemConfig config_from_kv(const KvMap& m, const SystemConfig& base) {
    SystemConfig cfg = base;
    cfg.n_v = kv_get_int(m, "system.n_v", cfg.n_v);
    cfg.n_h = kv_get_int(m, "system.n_h", cfg.n_h);
    cfg.n_pol = kv_get_int(m, "system.n_pol", cfg.n_pol);
    cfg.n_f = kv_get_int(m, "system.n_f", cfg.n_f);
    cfg.delta_f = kv_get_double(m, "system.delta_f", cfg.delta_f);
    cfg.t_w = kv_get_int(m, "system.t_w", cfg.t_w);
    cfg.delta_t = kv_get_double(m, "system.delta_t", cfg.delta_t);
    cfg.carrier_freq = kv_get_double(m, "system.carrier_freq", cfg.carrier_freq);
    cfg.pilot_block = kv_get_int(m, "system.pilot_block", cfg.pilot_block);
    cfg.validate();
    return cfg;
}

} // namespace dda
