#pragma once

namespace mtoc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mtoc
