#pragma once

namespace uncert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace uncert
