#include "claa/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace claa {

namespace {

LogLevel initial_level() {
  const char* env = std::getenv("CLAA_LOG_LEVEL");
  if (env == nullptr) return LogLevel::Warning;
  const std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  if (v == "error") return LogLevel::Error;
  return LogLevel::Warning;
}

std::atomic<LogLevel>& threshold() {
  static std::atomic<LogLevel> level{initial_level()};
  return level;
}

constexpr const char* kNames[] = {"debug", "info", "warning", "error"};

}  // namespace

void set_log_level(LogLevel level) { threshold().store(level); }

void log(LogLevel level, std::string_view message) {
  if (level < threshold().load()) return;
  static std::mutex m;
  std::lock_guard lock(m);
  std::clog << "[claa " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace claa
