#pragma once

#include <string>

namespace multirat::harness {

// Reads MULTIRAT_LOG_LEVEL (error, info, debug); defaults to info. Throws on
// an unrecognized level.
void init_logging();

void log_info(const std::string& message);
void log_debug(const std::string& message);
void log_error(const std::string& message);

}  // namespace multirat::harness
