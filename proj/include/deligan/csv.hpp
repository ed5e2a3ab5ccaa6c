#pragma once

#include <string>
#include <vector>

namespace deligan::csv {

// Shortest round-trip decimal form ('.' separator, deterministic bytes).
std::string format(double v);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const; // throws FormatError if absent
};

Table parse(const std::string& contents);
Table read_table(const std::string& path);

std::vector<double> to_doubles(const std::vector<std::string>& cells);

} // namespace deligan::csv
