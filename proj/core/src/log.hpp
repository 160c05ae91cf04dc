#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace dimfuse::log {

/// Shared stderr logger. Messages use key=value fields (module=, site_id=, ...).
std::shared_ptr<spdlog::logger> get();

}  // namespace dimfuse::log
