#pragma once

#include <stdexcept>
#include <string>

namespace fltc::capi {

// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Result document {"report": ..., "files": [{"name", "content"}]} for one command.
std::string run_command(const std::string& command, const std::string& config_json);

}  // namespace fltc::capi
