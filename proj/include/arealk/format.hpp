#pragma once

#include <charconv>
#include <string>

namespace arealk {

/// Shortest round-trip decimal form of a double; stable across runs, used
/// everywhere byte-identical output matters.
inline std::string to_string_shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace arealk
