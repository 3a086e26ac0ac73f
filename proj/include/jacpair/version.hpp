#pragma once

namespace jacpair {

inline constexpr const char* kSoftwareName = "jacpair";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace jacpair
