#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace survbal {

// Shortest decimal representation that parses back to the same double.
std::string fmt_double(double v);
std::string fmt_int(long long v);
std::string fmt_u64(unsigned long long v);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

// Minimal CSV: comma separated, no quoting (fields never contain commas).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int col(std::string_view name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv(const CsvTable& tab, const std::string& path);

std::vector<std::string> split(std::string_view line, char sep);

}  // namespace survbal
