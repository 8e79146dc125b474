#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <string_view>

namespace webcp::log {

enum class Level { kDebug, kInfo, kWarn, kError };

using Sink = std::function<void(const std::string& line)>;

/// Replaces the global sink (default: stderr). Returns the previous sink.
Sink set_sink(Sink sink);

void set_min_level(Level level);

/// Emits one line-delimited JSON event: {"level", "stage", "event", ...fields}.
void event(Level level, std::string_view stage, std::string_view name,
           nlohmann::json fields = nlohmann::json::object());

inline void info(std::string_view stage, std::string_view name,
                 nlohmann::json fields = nlohmann::json::object()) {
  event(Level::kInfo, stage, name, std::move(fields));
}

inline void warn(std::string_view stage, std::string_view name,
                 nlohmann::json fields = nlohmann::json::object()) {
  event(Level::kWarn, stage, name, std::move(fields));
}

}  // namespace webcp::log
