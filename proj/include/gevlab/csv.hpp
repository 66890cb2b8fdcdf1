#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gevlab {

/// Fixed textual form so reruns produce identical bytes.
inline std::string fmt_num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string fmt_num(long x) { return std::to_string(x); }
inline std::string fmt_num(unsigned long x) { return std::to_string(x); }
inline std::string fmt_num(int x) { return std::to_string(x); }
inline std::string fmt_bool(bool b) { return b ? "true" : "false"; }

inline double parse_num(const std::string& s) {
    if (s == "+inf" || s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    return std::stod(s);
}

struct Table {
    std::string name;  // file name without directory
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != columns.size()) throw std::logic_error("Table " + name + ": row width mismatch");
        rows.push_back(std::move(row));
    }

    std::size_t column(const std::string& c) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == c) return i;
        throw std::out_of_range("no column " + c + " in " + name);
    }

    std::string text() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += r[i];
            }
            out += '\n';
        };
        line(columns);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline void write_table(const std::filesystem::path& dir, const Table& t) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / t.name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / t.name).string());
    out << t.text();
}

/// No quoting: none of the emitted fields contain commas.
inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Table t;
    t.name = path.filename().string();
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) out.push_back(f);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            t.columns = split(line);
            header = false;
            continue;
        }
        auto r = split(line);
        if (r.size() != t.columns.size()) throw std::runtime_error(path.string() + ": ragged row");
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace gevlab
