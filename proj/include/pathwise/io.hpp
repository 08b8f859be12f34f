#pragma once

// CSV path format: header `t,x1,...,xd[,jump_left_1..d]`. A jump row carries
// the right limit in the value columns and the left limit in the jump_left
// columns; non-jump rows leave the jump_left cells empty. Floating point is
// serialized with 17 significant digits so round trips are exact.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathwise/sample_path.hpp"

namespace pathwise {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string path_to_csv(const SamplePath& path) {
    const std::size_t d = path.dim();
    const bool with_jumps = !path.jumps.empty();
    std::ostringstream out;
    out << "t";
    for (std::size_t j = 0; j < d; ++j) out << ",x" << (j + 1);
    if (with_jumps)
        for (std::size_t j = 0; j < d; ++j) out << ",jump_left_" << (j + 1);
    out << "\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << format_double(path.times[i]);
        for (std::size_t j = 0; j < d; ++j) out << "," << format_double(path.values[i][j]);
        if (with_jumps) {
            const Jump* jp = path.jump_at(i);
            for (std::size_t j = 0; j < d; ++j) {
                out << ",";
                if (jp) out << format_double(jp->left[j]);
            }
        }
        out << "\n";
    }
    return out.str();
}

inline void write_path_csv(const std::string& filename, const SamplePath& path) {
    std::ofstream f(filename, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + filename);
    f << path_to_csv(path);
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}
}  // namespace detail

inline SamplePath path_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("path csv: empty input");
    const auto header = detail::split_csv_line(line);
    if (header.empty() || header[0] != "t") throw std::runtime_error("path csv: header must start with t");
    std::size_t d = 0;
    while (1 + d < header.size() && header[1 + d] == "x" + std::to_string(d + 1)) ++d;
    if (d == 0) throw std::runtime_error("path csv: no value columns");
    bool with_jumps = false;
    if (header.size() == 1 + 2 * d) {
        with_jumps = true;
        for (std::size_t j = 0; j < d; ++j)
            if (header[1 + d + j] != "jump_left_" + std::to_string(j + 1))
                throw std::runtime_error("path csv: malformed jump_left columns");
    } else if (header.size() != 1 + d) {
        throw std::runtime_error("path csv: malformed header");
    }

    SamplePath p;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) throw std::runtime_error("path csv: ragged row");
        const double t = std::stod(cells[0]);
        Vec v(d);
        for (std::size_t j = 0; j < d; ++j) v[j] = std::stod(cells[1 + j]);
        if (!p.times.empty() && !(t > p.times.back()))
            throw std::runtime_error("path csv: times not strictly increasing");
        p.times.push_back(t);
        p.values.push_back(v);
        if (with_jumps && !cells[1 + d].empty()) {
            Jump jj;
            jj.index = p.times.size() - 1;
            jj.right = v;
            jj.left.resize(d);
            for (std::size_t j = 0; j < d; ++j) jj.left[j] = std::stod(cells[1 + d + j]);
            p.jumps.push_back(jj);
        }
    }
    p.sort_jump_registry();
    p.validate();
    return p;
}

inline SamplePath read_path_csv(const std::string& filename) {
    std::ifstream f(filename, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for read: " + filename);
    return path_from_csv(f);
}

}  // namespace pathwise
