#include "prbi/config_io.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace prbi {

namespace {

std::string trim(const std::string& s) {
  const std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": " + value);
  }
  if (used != value.size()) throw ConfigError("bad numeric value for " + key + ": " + value);
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": " + value);
  }
  if (used != value.size()) throw ConfigError("bad integer value for " + key + ": " + value);
  if (out < -2147483648ll || out > 2147483647ll)
    throw ConfigError("integer out of range for " + key + ": " + value);
  return static_cast<int>(out);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad unsigned value for " + key + ": " + value);
  }
  if (used != value.size()) throw ConfigError("bad unsigned value for " + key + ": " + value);
  return out;
}

std::vector<VehicleId> parse_id_list(const std::string& key, const std::string& value) {
  std::vector<VehicleId> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in " + key + ": " + value);
    out.push_back(parse_int(key, item));
  }
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
  ScenarioConfig config;
  std::set<std::string> seen;
  std::stringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("duplicate key: " + key);

    if (key == "n") {
      config.world.n = parse_int(key, value);
    } else if (key == "attacker_set") {
      config.world.attacker_set = parse_id_list(key, value);
    } else if (key == "seed") {
      config.world.seed = parse_u64(key, value);
    } else if (key == "object_count") {
      config.world.object_count = parse_int(key, value);
    } else if (key == "persist_prob") {
      config.world.persist_prob = parse_double(key, value);
    } else if (key == "jitter_sigma") {
      config.world.jitter_sigma = parse_double(key, value);
    } else if (key == "miss_prob") {
      config.world.miss_prob = parse_double(key, value);
    } else if (key == "speed_max") {
      config.world.speed_max = parse_double(key, value);
    } else if (key == "attack_model") {
      if (value == "persistent")
        config.world.attack_model = AttackModel::Persistent;
      else if (value == "intermittent")
        config.world.attack_model = AttackModel::Intermittent;
      else
        throw ConfigError("bad attack_model: " + value);
    } else if (key == "attack_period") {
      config.world.attack_period = parse_int(key, value);
    } else if (key == "attack_start") {
      config.world.attack_start = parse_int(key, value);
    } else if (key == "delta_del") {
      config.world.delta_del = parse_double(key, value);
    } else if (key == "delta_inj") {
      config.world.delta_inj = parse_double(key, value);
    } else if (key == "epsilon") {
      config.prbi.epsilon = parse_double(key, value);
    } else if (key == "window_size") {
      config.prbi.window_size = parse_int(key, value);
    } else if (key == "alpha") {
      config.prbi.alpha = parse_double(key, value);
    } else if (key == "gamma") {
      config.prbi.gamma = parse_double(key, value);
    } else if (key == "lambda") {
      config.prbi.lambda = parse_double(key, value);
    } else if (key == "tau_match") {
      config.prbi.tau_match = parse_double(key, value);
    } else if (key == "grouping_rounding") {
      if (value == "floor")
        config.prbi.grouping_rounding = Rounding::Floor;
      else if (value == "ceil")
        config.prbi.grouping_rounding = Rounding::Ceil;
      else if (value == "nearest")
        config.prbi.grouping_rounding = Rounding::Nearest;
      else
        throw ConfigError("bad grouping_rounding: " + value);
    } else if (key == "frame_count") {
      config.frame_count = parse_int(key, value);
    } else if (key == "method") {
      try {
        config.method = method_from_name(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "replicates") {
      config.replicates = parse_int(key, value);
    } else {
      throw ConfigError("unknown key: " + key);
    }
  }
  try {
    validate_scenario(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_config(buffer.str());
}

}  // namespace prbi
