#pragma once

namespace migbatchsim {
namespace log {

enum class Level : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from MIGBATCHSIM_LOG (error|warn|info|debug); default warn.
Level threshold();
void set_threshold(Level level);

void write(Level level, const char* fmt, ...);

}  // namespace log
}  // namespace migbatchsim

#define MBS_ERROR(...) ::migbatchsim::log::write(::migbatchsim::log::Level::Error, __VA_ARGS__)
#define MBS_WARN(...) ::migbatchsim::log::write(::migbatchsim::log::Level::Warn, __VA_ARGS__)
#define MBS_INFO(...) ::migbatchsim::log::write(::migbatchsim::log::Level::Info, __VA_ARGS__)
#define MBS_DEBUG(...) ::migbatchsim::log::write(::migbatchsim::log::Level::Debug, __VA_ARGS__)
