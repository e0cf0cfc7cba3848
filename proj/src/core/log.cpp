#include "core/log.hpp"

#include <mutex>

namespace hsd::log {

namespace {
std::mutex g_mutex;
Sink g_sink;
}  // namespace

void set_sink(Sink sink) {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_sink = std::move(sink);
}

void event(const std::string& json) {
    std::lock_guard<std::mutex> lock(g_mutex);
    if (g_sink) g_sink(json);
}

}  // namespace hsd::log
