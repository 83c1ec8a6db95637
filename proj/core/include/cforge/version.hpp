#pragma once

namespace cforge {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kDatasetFormatVersion = "1";

}  // namespace cforge
