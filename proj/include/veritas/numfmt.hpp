#pragma once

#include <cstdio>
#include <string>

namespace veritas {

/// Canonical fraction formatting for reports: up to 4 decimal places, no
/// trailing zeros beyond one decimal ("0.5", "0.6667", "1.0").
inline std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    std::string s(buf);
    size_t last = s.size();
    const size_t dot = s.find('.');
    while (last - 1 > dot + 1 && s[last - 1] == '0') --last;
    s.resize(last);
    return s;
}

}  // namespace veritas
