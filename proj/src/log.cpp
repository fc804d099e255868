#include "coalition_nash/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace coalition_nash::log {

namespace {

Level read_threshold() {
    const char* env = std::getenv("COALITION_NASH_LOG");
    if (env == nullptr) return Level::Info;
    std::string v(env);
    if (v == "quiet") return Level::Quiet;
    if (v == "debug") return Level::Debug;
    return Level::Info;
}

std::mutex sink_mutex;
Sink custom_sink;

void emit(Level lv, const char* tag, const std::string& msg) {
    if (threshold() < lv) return;
    std::lock_guard<std::mutex> lock(sink_mutex);
    if (custom_sink) {
        custom_sink(lv, msg);
    } else {
        std::cerr << "[coalition-nash " << tag << "] " << msg << '\n';
    }
}

}  // namespace

Level threshold() {
    // Re-read each call: tests flip the environment variable at runtime and
    // the cost is irrelevant next to anything worth logging.
    return read_threshold();
}

void info(const std::string& msg) { emit(Level::Info, "info", msg); }
void debug(const std::string& msg) { emit(Level::Debug, "debug", msg); }
void warn(const std::string& msg) { emit(Level::Info, "warning", msg); }

void set_sink(Sink sink) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    custom_sink = std::move(sink);
}

}  // namespace coalition_nash::log
