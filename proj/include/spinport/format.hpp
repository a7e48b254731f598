// Shortest round-trip formatting for doubles (used by the DSL printer,
// builtin script generation and CSV output). Parsing the result recovers
// the exact bit pattern.

#pragma once

#include <charconv>
#include <string>

namespace spinport {

inline std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

}  // namespace spinport
