#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <string>

namespace vipscene {

// Structured events (one JSON object per event). The library is silent until
// a sink is installed; the CLI installs a stderr line-delimited sink.
using LogSink = std::function<void(const nlohmann::json&)>;

void set_log_sink(LogSink sink);
void log_event(const std::string& event, nlohmann::json fields = nlohmann::json::object());

} // namespace vipscene
