#include "webcp/common/log.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>

namespace webcp::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& sink() {
  static Sink s = [](const std::string& line) { std::cerr << line << '\n'; };
  return s;
}

std::atomic<Level>& min_level() {
  static std::atomic<Level> level{Level::kInfo};
  return level;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

Sink set_sink(Sink s) {
  std::lock_guard lock(sink_mutex());
  std::swap(sink(), s);
  return s;
}

void set_min_level(Level level) { min_level().store(level); }

void event(Level level, std::string_view stage, std::string_view name, nlohmann::json fields) {
  if (level < min_level().load()) return;
  nlohmann::json line = std::move(fields);
  if (!line.is_object()) line = nlohmann::json{{"value", line}};
  line["level"] = level_name(level);
  line["stage"] = stage;
  line["event"] = name;
  line["ts_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
  const std::string text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(text);
}

}  // namespace webcp::log
