#include "fairwasp/common.hpp"

#include <cstdlib>
#include <iostream>
#include <thread>

namespace fairwasp {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FAIRWASP_LOG");
    if (env == nullptr) return LogLevel::Error;
    const std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) {
    std::cerr << "[fairwasp] " << msg << "\n";
  }
}

int default_thread_count() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace fairwasp
