#pragma once

#include <charconv>
#include <string>

namespace exlab {

/// Shortest decimal form of a double that parses back to the same bits.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace exlab
