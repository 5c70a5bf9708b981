#include "vipscene/log.hpp"

#include <mutex>

namespace vipscene {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink() {
  static LogSink s;
  return s;
}

} // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void log_event(const std::string& event, nlohmann::json fields) {
  std::lock_guard lock(sink_mutex());
  if (!sink()) return;
  fields["event"] = event;
  sink()(fields);
}

} // namespace vipscene
