#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "labb/errors.hpp"

namespace labb {

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ValidationError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
    return x;
}

inline long long parse_int(std::string_view s, std::string_view what) {
    long long x = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ValidationError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
    return x;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

} // namespace labb
