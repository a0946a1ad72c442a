#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

namespace gasreg::logging {

enum class Level { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from the GASREG_LOG environment variable
// (quiet|warn|info|debug); default is warn. Output goes to stderr so it
// never mixes with CSV or JSON written to stdout or files.
inline Level level() {
  static const Level lvl = [] {
    const char* v = std::getenv("GASREG_LOG");
    if (v == nullptr) return Level::Warn;
    if (std::strcmp(v, "quiet") == 0) return Level::Quiet;
    if (std::strcmp(v, "info") == 0) return Level::Info;
    if (std::strcmp(v, "debug") == 0) return Level::Debug;
    return Level::Warn;
  }();
  return lvl;
}

namespace detail {
template <typename... Args>
inline void emit(const char* tag, const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  std::fprintf(stderr, "[%s] %s\n", tag, os.str().c_str());
}
}  // namespace detail

template <typename... Args>
inline void warn(const Args&... args) {
  if (level() >= Level::Warn) detail::emit("warn", args...);
}

template <typename... Args>
inline void info(const Args&... args) {
  if (level() >= Level::Info) detail::emit("info", args...);
}

template <typename... Args>
inline void debug(const Args&... args) {
  if (level() >= Level::Debug) detail::emit("debug", args...);
}

}  // namespace gasreg::logging
