#pragma once

// One key-value file configures a whole run. Sections:
//   [run]         seed, scenario_id
//   [synthetic]   generator distributions (see SyntheticConfig)
//   [regions]     <id> = <name>, <urbanization>[, home_weight[, work_weight]]
//   [battery]     <capacity_kwh> = <share>
//   [simulation]  decision model, charging rates, energy factor
//   [season]      winter|spring|summer|autumn consumption factors
//   [flex]        flexibility filters
// Unknown sections and keys are errors.

#include <optional>
#include <string>

#include "evflex/battery.hpp"
#include "evflex/config.hpp"
#include "evflex/decision.hpp"
#include "evflex/digest.hpp"
#include "evflex/flex.hpp"
#include "evflex/synthetic.hpp"

namespace evflex {

struct RunConfig {
  std::uint64_t seed = 42;
  std::string scenario_id = "default";
  std::string season = "winter";
  std::string config_hash;  // sha256 of the canonical key-value text
  SyntheticConfig synthetic;
  BatteryMenu battery;
  SimulationConfig simulation;
  FlexConfig flex;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> season;
};

inline FlexConfig flex_config_from(const KeyValueConfig& kv) {
  FlexConfig f;
  f.min_parking_minutes = static_cast<Minutes>(kv.get_int("flex.min_parking_minutes", f.min_parking_minutes));
  f.max_parking_minutes = static_cast<Minutes>(kv.get_int("flex.max_parking_minutes", f.max_parking_minutes));
  f.min_parking_to_charging_pct =
      static_cast<int>(kv.get_int("flex.min_parking_to_charging_pct", f.min_parking_to_charging_pct));
  f.full_case_pct = static_cast<int>(kv.get_int("flex.full_case_pct", f.full_case_pct));
  if (f.min_parking_minutes < 0 || f.max_parking_minutes < f.min_parking_minutes)
    throw InputError("flex: need 0 <= min_parking_minutes <= max_parking_minutes");
  if (f.min_parking_to_charging_pct < 100 || f.full_case_pct < f.min_parking_to_charging_pct)
    throw InputError("flex: need 100 <= min_parking_to_charging_pct <= full_case_pct");
  return f;
}

inline RunConfig run_config_from(const KeyValueConfig& kv, const RunOverrides& overrides = {}) {
  RunConfig rc;
  const long long seed = kv.get_int("run.seed", static_cast<long long>(rc.seed));
  if (seed < 0) throw InputError("run.seed must be >= 0");
  rc.seed = overrides.seed.value_or(static_cast<std::uint64_t>(seed));
  rc.scenario_id = kv.get_string("run.scenario_id", rc.scenario_id);
  rc.synthetic = SyntheticConfig::from_config(kv);
  rc.season = overrides.season.value_or(rc.synthetic.season);
  rc.synthetic.season = rc.season;
  rc.battery = BatteryMenu::from_config(kv);
  rc.simulation = simulation_config_from(kv, rc.season);
  rc.flex = flex_config_from(kv);
  kv.reject_unknown({"run", "synthetic", "regions", "battery", "simulation", "season", "flex"});
  rc.config_hash = sha256_hex(kv.canonical());
  return rc;
}

/// Loads `path`, or the built-in defaults when `path` is empty.
inline RunConfig load_run_config(const std::string& path, const RunOverrides& overrides = {}) {
  if (path.empty()) return run_config_from(KeyValueConfig::parse_string(""), overrides);
  return run_config_from(KeyValueConfig::load(path), overrides);
}

}  // namespace evflex
