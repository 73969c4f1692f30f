#pragma once

namespace stlt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stlt
