#pragma once

#include <functional>
#include <string>

namespace coalition_nash::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

// Verbosity comes from the COALITION_NASH_LOG environment variable
// (quiet | info | debug); unset or unrecognized values mean "info".
Level threshold();

void info(const std::string& msg);
void debug(const std::string& msg);
void warn(const std::string& msg);  // emitted unless quiet

// Redirect log output (default: stderr). Used by tests to capture warnings;
// pass nullptr to restore the default sink.
using Sink = std::function<void(Level, const std::string&)>;
void set_sink(Sink sink);

}  // namespace coalition_nash::log
