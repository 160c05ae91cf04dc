#include "log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include "dimfuse/logging.hpp"

namespace dimfuse {

namespace log {

std::shared_ptr<spdlog::logger> get() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("dimfuse");
    l->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
    l->set_level(spdlog::level::info);
    return l;
  }();
  return logger;
}

}  // namespace log

void set_log_level(std::string_view level) {
  log::get()->set_level(spdlog::level::from_str(std::string(level)));
}

}  // namespace dimfuse
