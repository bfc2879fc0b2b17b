#pragma once

#include <stdexcept>
#include <string>

#include "prbi/harness.hpp"

namespace prbi {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// flat `key = value` text, # comments, keys named exactly after the config
// fields; unknown or duplicate keys and out-of-range values all throw
ScenarioConfig parse_scenario_config(const std::string& text);
ScenarioConfig load_scenario_config(const std::string& path);

}  // namespace prbi
