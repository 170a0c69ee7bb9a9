#pragma once

namespace wcsplit {
inline constexpr const char* kVersion = "0.1.0";
}
