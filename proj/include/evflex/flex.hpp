#pragma once

// Charging flexibility per charging event: how far the charging power of a
// plugged-in vehicle may deviate from its baseline within the same parking
// event, and how much of the charged energy is shiftable.

#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "evflex/charge_sim.hpp"
#include "evflex/types.hpp"

namespace evflex {

struct FlexConfig {
  Minutes min_parking_minutes = 60;
  Minutes max_parking_minutes = 900;
  // Integer percentages keep the filters exact in minute arithmetic.
  int min_parking_to_charging_pct = 105;
  int full_case_pct = 200;
};

struct TimeWindow {
  Minutes start = 0;
  Minutes end = 0;

  [[nodiscard]] Minutes length() const { return end - start; }
  [[nodiscard]] bool empty() const { return end <= start; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

enum class FlexCase : std::uint8_t { Full, Partial };

inline constexpr char flex_case_code(FlexCase c) { return c == FlexCase::Full ? 'F' : 'P'; }

/// Signed power deviation bounds of one charging event. `down` lowers the
/// baseline to zero; `up` adds the charging rate where the vehicle idles;
/// `dead` (Partial only) is the part of the charge that cannot move.
struct FlexibilityEnvelope {
  DriverId driver_id = 0;
  std::int32_t parking_index = 0;
  FlexCase flex_case = FlexCase::Full;
  TimeWindow down;
  std::optional<TimeWindow> dead;
  TimeWindow up;
  double rate_kw = 0.0;
  double flexible_energy_kwh = 0.0;

  [[nodiscard]] TimeWindow parking() const { return {down.start, up.end}; }
  /// Energy of the upward window, rate times idle time.
  [[nodiscard]] double up_energy_kwh() const { return rate_kw * up.length() / 60.0; }

  friend bool operator==(const FlexibilityEnvelope&, const FlexibilityEnvelope&) = default;
};

enum class FlexExclusion : std::uint8_t { None, ParkingTooShort, ParkingTooLong, ChargingFillsParking };

inline constexpr std::string_view exclusion_name(FlexExclusion x) {
  switch (x) {
    case FlexExclusion::None: return "none";
    case FlexExclusion::ParkingTooShort: return "parking_too_short";
    case FlexExclusion::ParkingTooLong: return "parking_too_long";
    case FlexExclusion::ChargingFillsParking: return "charging_fills_parking";
  }
  return "?";
}

inline FlexExclusion flex_exclusion(Minutes parking_minutes, Minutes charging_minutes, const FlexConfig& fc = {}) {
  if (parking_minutes < fc.min_parking_minutes) return FlexExclusion::ParkingTooShort;
  if (parking_minutes > fc.max_parking_minutes) return FlexExclusion::ParkingTooLong;
  if (100LL * parking_minutes < static_cast<long long>(fc.min_parking_to_charging_pct) * charging_minutes)
    return FlexExclusion::ChargingFillsParking;
  return FlexExclusion::None;
}

/// Eligible iff t_p >= 1.05 t_c and 1 h <= t_p <= 15 h (all non-strict).
inline bool is_flexible_event(const ChargingEvent& charging, const ScheduleEvent& parking, const FlexConfig& fc = {}) {
  return flex_exclusion(parking.duration(), charging.duration(), fc) == FlexExclusion::None;
}

inline FlexibilityEnvelope quantify_event(const ChargingEvent& charging, const ScheduleEvent& parking,
                                          const FlexConfig& fc = {}) {
  if (charging.charge_start != parking.start || charging.charge_end > parking.end)
    throw InvariantError(fmt::format("charging event of driver {} (parking {}) does not lie in its parking event",
                                     charging.driver_id, charging.parking_index));
  if (!is_flexible_event(charging, parking, fc))
    throw InvariantError(fmt::format("charging event of driver {} (parking {}) is not flexible",
                                     charging.driver_id, charging.parking_index));
  const Minutes tp = parking.duration();
  const Minutes tc = charging.duration();
  FlexibilityEnvelope env;
  env.driver_id = charging.driver_id;
  env.parking_index = charging.parking_index;
  env.rate_kw = charging.rate_kw;
  env.up = {charging.charge_end, parking.end};
  if (100LL * tp >= static_cast<long long>(fc.full_case_pct) * tc) {
    env.flex_case = FlexCase::Full;
    env.down = {parking.start, charging.charge_end};
    env.flexible_energy_kwh = charging.energy_kwh;
  } else {
    env.flex_case = FlexCase::Partial;
    const Minutes latest_start = parking.end - tc;
    env.down = {parking.start, latest_start};
    env.dead = TimeWindow{latest_start, charging.charge_end};
    env.flexible_energy_kwh = charging.rate_kw * (parking.end - charging.charge_end) / 60.0;
  }
  return env;
}

/// Days credited with the envelope's flexible energy: each calendar day the
/// parking event touches, wrapping around the week.
inline std::vector<int> credited_days(const FlexibilityEnvelope& env) {
  const auto p = env.parking();
  const int first = day_of(p.start);
  const int last = day_of(p.end - 1);
  std::vector<int> days{first};
  for (int d = first; d != last;) {
    d = (d + 1) % kDaysPerWeek;
    days.push_back(d);
  }
  return days;
}

/// Flexible energy per day; a parking event that spans midnight credits its
/// full flexible energy to every day it touches.
inline std::vector<std::pair<int, double>> split_daily_energy(const FlexibilityEnvelope& env) {
  std::vector<std::pair<int, double>> out;
  for (int d : credited_days(env)) out.emplace_back(d, env.flexible_energy_kwh);
  return out;
}

inline std::string days_credited_text(const FlexibilityEnvelope& env) {
  std::string out;
  for (int d : credited_days(env)) {
    if (!out.empty()) out += ';';
    out += std::to_string(d);
  }
  return out;
}

}  // namespace evflex
