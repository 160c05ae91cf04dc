#pragma once

#include <string_view>

namespace dimfuse {

/// "trace", "debug", "info", "warn", "error", "critical" or "off".
void set_log_level(std::string_view level);

}  // namespace dimfuse
