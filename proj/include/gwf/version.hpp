#pragma once

namespace gwf {

inline constexpr const char* kToolName = "gaborwf";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace gwf
