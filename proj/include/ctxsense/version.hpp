#pragma once

#include <string_view>

namespace ctxsense {

inline constexpr std::string_view kToolName = "ctxsense";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace ctxsense
