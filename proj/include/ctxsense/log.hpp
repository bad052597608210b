#pragma once

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace ctxsense {

/// Log level from CTXSENSE_LOG (error|warn|info|debug); warn when unset or
/// unrecognised. Messages go to stderr so stdout stays machine-readable.
inline void init_logging() {
  auto logger = spdlog::stderr_color_mt("ctxsense");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("CTXSENSE_LOG")) {
    const std::string_view v(env);
    if (v == "error") level = spdlog::level::err;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

}  // namespace ctxsense
