#pragma once

namespace rspread {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rspread
