#include "survbal/config.hpp"

#include "survbal/common.hpp"
#include "survbal/numio.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace survbal {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError(origin + ":" + fmt_int(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError(origin + ":" + fmt_int(lineno) + ": empty section name");
            cfg.data_[section];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + fmt_int(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError(origin + ":" + fmt_int(lineno) + ": empty key");
        if (section.empty())
            throw ValidationError(origin + ":" + fmt_int(lineno) + ": key outside any [section]");
        cfg.data_[section][key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string Config::require(const std::string& section, const std::string& key) const {
    return data_.at(section).at(key);
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return has(section, key) ? require(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return parse_double(require(section, key));
    } catch (const ValidationError&) {
        throw ValidationError("config [" + section + "] " + key + ": expected a number, got '" +
                              require(section, key) + "'");
    }
}

long long Config::get_int(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return parse_int(require(section, key));
    } catch (const ValidationError&) {
        throw ValidationError("config [" + section + "] " + key + ": expected an integer, got '" +
                              require(section, key) + "'");
    }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = require(section, key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config [" + section + "] " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& piece : split(require(section, key), ',')) {
        std::string p = trim(piece);
        if (p.empty())
            throw ValidationError("config [" + section + "] " + key + ": empty list element");
        out.push_back(parse_double(p));
    }
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

}  // namespace survbal
