#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace hermnet::detail {

/// Shortest decimal that parses back to the same double.
inline std::string shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

}  // namespace hermnet::detail
