#pragma once

#include <functional>
#include <string>

namespace hsd::log {

using Sink = std::function<void(const std::string& json_line)>;

// Install a sink for structured run events (one JSON object per call).
// Passing an empty function silences logging. Thread-safe.
void set_sink(Sink sink);

// Emit one event line. `json` must already be a serialized JSON object.
void event(const std::string& json);

}  // namespace hsd::log
