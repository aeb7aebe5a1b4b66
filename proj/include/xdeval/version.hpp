#pragma once

namespace xdeval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xdeval
