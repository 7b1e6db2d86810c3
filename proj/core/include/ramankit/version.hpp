#pragma once

namespace ramankit {

inline constexpr const char* version = "0.1.0";

}  // namespace ramankit
