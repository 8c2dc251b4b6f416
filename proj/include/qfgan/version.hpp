#pragma once

namespace qfgan {
inline constexpr const char* kVersion = "0.1.0";
}
