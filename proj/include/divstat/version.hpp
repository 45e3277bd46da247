#pragma once

namespace divstat {

inline constexpr const char* library_name = "divstat";
inline constexpr const char* library_version = "1.0.0";

} // namespace divstat
