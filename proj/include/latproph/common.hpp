#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace latproph {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// LATPROPH_LOG={error,info,debug}; defaults to error.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("LATPROPH_LOG");
    if (env == nullptr) return LogLevel::kError;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::kDebug;
    if (v == "info") return LogLevel::kInfo;
    return LogLevel::kError;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::fprintf(stderr, "[latproph] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::fprintf(stderr, "[latproph] %s\n", msg.c_str());
}

}  // namespace latproph
