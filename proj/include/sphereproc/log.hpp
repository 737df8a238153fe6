#pragma once

#include <functional>
#include <iostream>
#include <string>

namespace sphereproc {

/// Process-wide warning sink. Replace to capture or silence warnings.
inline std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler =
      [](const std::string& msg) { std::cerr << "sphereproc: warning: " << msg << "\n"; };
  return handler;
}

inline void log_warning(const std::string& msg) {
  if (warning_handler()) warning_handler()(msg);
}

}  // namespace sphereproc
