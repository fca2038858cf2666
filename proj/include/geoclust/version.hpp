#pragma once

namespace geoclust {
inline constexpr const char* kVersion = "0.1.0";
}
