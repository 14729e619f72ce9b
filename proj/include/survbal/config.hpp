#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace survbal {

// Flat "key = value" file grouped by [section] headers. '#' starts a comment.
// Typed getters throw ValidationError naming the offending section/key.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return data_; }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::string origin_;
    std::string require(const std::string& section, const std::string& key) const;
};

}  // namespace survbal
