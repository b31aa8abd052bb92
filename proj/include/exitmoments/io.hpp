#pragma once

#include "exitmoments/errors.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace exitmoments {

// 12 significant digits: below quadrature tolerance, above sampling noise.
inline std::string g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw OutOfRange("cannot open output file '" + path + "'");
    f << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw OutOfRange("cannot open input file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace exitmoments
