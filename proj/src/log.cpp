#include "migbatchsim/log.hpp"

#include <atomic>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace migbatchsim {
namespace log {

namespace {

Level parse_env() {
  const char* env = std::getenv("MIGBATCHSIM_LOG");
  if (env == nullptr) return Level::Warn;
  if (std::strcmp(env, "error") == 0) return Level::Error;
  if (std::strcmp(env, "warn") == 0) return Level::Warn;
  if (std::strcmp(env, "info") == 0) return Level::Info;
  if (std::strcmp(env, "debug") == 0) return Level::Debug;
  std::fprintf(stderr, "[migbatchsim] unknown MIGBATCHSIM_LOG value '%s', using warn\n", env);
  return Level::Warn;
}

std::atomic<int>& threshold_storage() {
  static std::atomic<int> value{static_cast<int>(parse_env())};
  return value;
}

const char* level_tag(Level level) {
  switch (level) {
    case Level::Error:
      return "error";
    case Level::Warn:
      return "warn";
    case Level::Info:
      return "info";
    case Level::Debug:
      return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(threshold_storage().load(std::memory_order_relaxed)); }

void set_threshold(Level level) {
  threshold_storage().store(static_cast<int>(level), std::memory_order_relaxed);
}

void write(Level level, const char* fmt, ...) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  std::fprintf(stderr, "[migbatchsim:%s] %s\n", level_tag(level), buf);
}

}  // namespace log
}  // namespace migbatchsim
