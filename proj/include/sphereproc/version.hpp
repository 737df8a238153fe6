#pragma once

namespace sphereproc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sphereproc
