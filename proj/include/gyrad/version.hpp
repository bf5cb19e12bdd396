#pragma once

namespace gyrad {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gyrad
