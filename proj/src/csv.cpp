#include "deligan/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "deligan/error.hpp"

namespace deligan::csv {

std::string format(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw DataError("short write to '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw FormatError("csv: no column named '" + name + "'");
}

namespace {
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}
} // namespace

Table parse(const std::string& contents) {
    Table t;
    std::istringstream ss(contents);
    std::string line;
    bool first = true;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) {
                throw FormatError("csv: row with " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(t.header.size()));
            }
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw FormatError("csv: missing header row");
    return t;
}

Table read_table(const std::string& path) { return parse(read_file(path)); }

std::vector<double> to_doubles(const std::vector<std::string>& cells) {
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        char* end = nullptr;
        const double v = std::strtod(c.c_str(), &end);
        if (end == c.c_str() || *end != '\0') throw FormatError("csv: not a number: '" + c + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace deligan::csv
