#pragma once

#include "anneal/sde.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace anneal {

// Numbers are printed with max_digits10 round-trip precision so identical
// doubles always produce identical bytes.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// write-to-temp then rename: readers never observe a partial file
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += fields[i];
    }
    line += '\n';
    return line;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out = csv_line(header);
    for (const auto& row : rows) {
        std::vector<std::string> fields;
        fields.reserve(row.size());
        for (double v : row) fields.push_back(format_double(v));
        out += csv_line(fields);
    }
    atomic_write(path, out);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

// columns: t, x1..xd, U, supU
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& tr,
                                 int dim) {
    std::vector<std::string> header{"t"};
    for (int a = 1; a <= dim; ++a) header.push_back("x" + std::to_string(a));
    header.push_back("U");
    header.push_back("supU");
    std::vector<std::vector<double>> rows;
    double run_sup = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        run_sup = std::max(run_sup, tr.u_values[k]);
        std::vector<double> row{tr.times[k]};
        row.insert(row.end(), tr.positions[k].begin(), tr.positions[k].end());
        row.push_back(tr.u_values[k]);
        row.push_back(run_sup);
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

} // namespace anneal
