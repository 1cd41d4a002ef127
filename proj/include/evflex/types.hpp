#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evflex {

using Minutes  = std::int32_t;
using DriverId = std::uint64_t;
using RegionId = std::uint32_t;

inline constexpr Minutes kMinutesPerHour = 60;
inline constexpr Minutes kMinutesPerDay  = 1440;
inline constexpr Minutes kDaysPerWeek    = 7;
inline constexpr Minutes kMinutesPerWeek = kMinutesPerDay * kDaysPerWeek;  // 10080
inline constexpr Minutes kPrefixMinutes  = 2 * kMinutesPerDay;             // 2880
inline constexpr int     kHoursPerWeek   = 168;

// Exit-code classes used by the command-line tools.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LocationPurpose : std::uint8_t { Home, Work, Leisure, Shop, Other };

inline constexpr char purpose_code(LocationPurpose p) {
  switch (p) {
    case LocationPurpose::Home: return 'H';
    case LocationPurpose::Work: return 'W';
    case LocationPurpose::Leisure: return 'L';
    case LocationPurpose::Shop: return 'S';
    case LocationPurpose::Other: return 'O';
  }
  return '?';
}

inline std::optional<LocationPurpose> purpose_from_code(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  switch (s[0]) {
    case 'H': return LocationPurpose::Home;
    case 'W': return LocationPurpose::Work;
    case 'L': return LocationPurpose::Leisure;
    case 'S': return LocationPurpose::Shop;
    case 'O': return LocationPurpose::Other;
    default: return std::nullopt;
  }
}

enum class Urbanization : std::uint8_t { Urban, Periurban, Rural };

inline constexpr std::string_view urbanization_name(Urbanization u) {
  switch (u) {
    case Urbanization::Urban: return "urban";
    case Urbanization::Periurban: return "periurban";
    case Urbanization::Rural: return "rural";
  }
  return "?";
}

inline std::optional<Urbanization> urbanization_from_name(std::string_view s) {
  if (s == "urban") return Urbanization::Urban;
  if (s == "periurban") return Urbanization::Periurban;
  if (s == "rural") return Urbanization::Rural;
  return std::nullopt;
}

enum class EventKind : std::uint8_t { Parking, Trip };

/// One row of a driver's schedule. Parking events use `purpose` and `region`
/// (where the car stands); trips use `energy_kwh` and `region` (destination).
struct ScheduleEvent {
  EventKind kind = EventKind::Parking;
  Minutes start = 0;
  Minutes end = 0;
  LocationPurpose purpose = LocationPurpose::Home;
  double energy_kwh = 0.0;
  RegionId region = 0;

  [[nodiscard]] bool is_parking() const { return kind == EventKind::Parking; }
  [[nodiscard]] bool is_trip() const { return kind == EventKind::Trip; }
  [[nodiscard]] Minutes duration() const { return end - start; }

  static ScheduleEvent parking(Minutes start, Minutes end, LocationPurpose purpose, RegionId region) {
    return {EventKind::Parking, start, end, purpose, 0.0, region};
  }
  static ScheduleEvent trip(Minutes start, Minutes end, double energy_kwh, RegionId destination) {
    return {EventKind::Trip, start, end, LocationPurpose::Home, energy_kwh, destination};
  }

  friend bool operator==(const ScheduleEvent&, const ScheduleEvent&) = default;
};

/// Chronological week of one driver, optionally preceded by the two-day
/// initialization prefix at negative times.
struct DriverSchedule {
  DriverId driver_id = 0;
  std::vector<ScheduleEvent> events;

  [[nodiscard]] bool has_prefix() const { return !events.empty() && events.front().start < 0; }

  friend bool operator==(const DriverSchedule&, const DriverSchedule&) = default;
};

struct Region {
  RegionId id = 0;
  std::string name;
  Urbanization urbanization = Urbanization::Urban;

  friend bool operator==(const Region&, const Region&) = default;
};

struct FleetScenario {
  std::vector<DriverSchedule> drivers;
  std::string season_label = "winter";
  std::vector<Region> regions;
  std::uint64_t global_seed = 0;

  [[nodiscard]] const Region* find_region(RegionId id) const {
    for (const auto& r : regions)
      if (r.id == id) return &r;
    return nullptr;
  }
};

/// Day index in [0, 7) of a minute, wrapping around the week.
inline constexpr int day_of(Minutes t) {
  Minutes w = t % kMinutesPerWeek;
  if (w < 0) w += kMinutesPerWeek;
  return static_cast<int>(w / kMinutesPerDay);
}

/// Hour index in [0, 168) of a minute, wrapping around the week.
inline constexpr int hour_of(Minutes t) {
  Minutes w = t % kMinutesPerWeek;
  if (w < 0) w += kMinutesPerWeek;
  return static_cast<int>(w / kMinutesPerHour);
}

}  // namespace evflex
