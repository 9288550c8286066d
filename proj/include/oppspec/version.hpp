#pragma once

namespace oppspec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oppspec
