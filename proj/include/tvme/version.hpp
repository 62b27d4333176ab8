#pragma once

namespace tvme {

inline constexpr const char* kToolName = "tvme";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace tvme
