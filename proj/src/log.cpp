#include "multirat/log.hpp"

#include <cstdlib>
#include <stdexcept>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace multirat::harness {

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static auto instance = [] {
        auto l = spdlog::stderr_color_mt("multirat");
        l->set_pattern("[%H:%M:%S] [%l] %v");
        l->set_level(spdlog::level::info);
        return l;
    }();
    return instance;
}

}  // namespace

void init_logging() {
    const char* raw = std::getenv("MULTIRAT_LOG_LEVEL");
    const std::string level = raw ? raw : "info";
    if (level == "error") logger()->set_level(spdlog::level::err);
    else if (level == "info") logger()->set_level(spdlog::level::info);
    else if (level == "debug") logger()->set_level(spdlog::level::debug);
    else throw std::invalid_argument("MULTIRAT_LOG_LEVEL must be one of error, info, debug (got '" + level + "')");
}

void log_info(const std::string& message) { logger()->info(message); }
void log_debug(const std::string& message) { logger()->debug(message); }
void log_error(const std::string& message) { logger()->error(message); }

}  // namespace multirat::harness
