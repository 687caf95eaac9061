#pragma once

#include <string_view>

namespace veritas {

inline constexpr std::string_view kToolName = "veritas";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace veritas
