#pragma once

// Mobility data model: schedule validation, charging rates per location and
// the delimited schedule/region file formats.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

#include "evflex/config.hpp"
#include "evflex/types.hpp"

namespace evflex {

/// Charger power per location type, in kW.
struct ChargingRates {
  double home = 7.0;
  double work = 11.0;
  double leisure = 22.0;
  double shop = 22.0;
  double other = 22.0;

  [[nodiscard]] double max() const { return std::max({home, work, leisure, shop, other}); }
};

inline double rate_for_purpose(LocationPurpose purpose, const ChargingRates& rates = {}) {
  switch (purpose) {
    case LocationPurpose::Home: return rates.home;
    case LocationPurpose::Work: return rates.work;
    case LocationPurpose::Leisure: return rates.leisure;
    case LocationPurpose::Shop: return rates.shop;
    case LocationPurpose::Other: return rates.other;
  }
  return rates.other;
}

// ---------------------------------------------------------------------------
// validation

enum class ViolationKind : std::uint8_t {
  Empty,
  StartsWithTrip,
  EndsWithTrip,
  AlternationBroken,
  NonContiguous,
  NonPositiveDuration,
  InvalidEnergy,
  BadSpan,
};

struct Violation {
  ViolationKind kind;
  std::size_t index = 0;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
  }
};

inline ValidationResult validate_schedule(const DriverSchedule& schedule) {
  ValidationResult result;
  auto add = [&](ViolationKind kind, std::size_t i, std::string msg) {
    result.violations.push_back({kind, i, std::move(msg)});
  };
  const auto& ev = schedule.events;
  if (ev.empty()) {
    add(ViolationKind::Empty, 0, "schedule has no events");
    return result;
  }
  if (!ev.front().is_parking()) add(ViolationKind::StartsWithTrip, 0, "schedule must start with a parking event");
  if (!ev.back().is_parking())
    add(ViolationKind::EndsWithTrip, ev.size() - 1, "schedule must end with a parking event");
  if (ev.front().start != 0 && ev.front().start != -kPrefixMinutes)
    add(ViolationKind::BadSpan, 0, fmt::format("schedule must start at 0 or {}, starts at {}", -kPrefixMinutes,
                                               ev.front().start));
  if (ev.back().end != kMinutesPerWeek)
    add(ViolationKind::BadSpan, ev.size() - 1,
        fmt::format("schedule must end at {}, ends at {}", kMinutesPerWeek, ev.back().end));

  for (std::size_t i = 0; i < ev.size(); ++i) {
    const auto& e = ev[i];
    if (e.start >= e.end)
      add(ViolationKind::NonPositiveDuration, i, fmt::format("event {} has start {} >= end {}", i, e.start, e.end));
    if (e.is_trip() && (!std::isfinite(e.energy_kwh) || e.energy_kwh < 0.0))
      add(ViolationKind::InvalidEnergy, i, fmt::format("trip {} has invalid energy {}", i, e.energy_kwh));
    if (i == 0) continue;
    if (ev[i - 1].kind == e.kind) add(ViolationKind::AlternationBroken, i, fmt::format("alternation broken at index {}", i));
    if (ev[i - 1].end != e.start)
      add(ViolationKind::NonContiguous, i,
          fmt::format("non-contiguous at index {}: previous ends at {}, next starts at {}", i, ev[i - 1].end, e.start));
  }
  return result;
}

/// The simulated week: events overlapping [0, 10080), with an event that
/// straddles the prefix boundary clipped to start at 0.
inline std::vector<ScheduleEvent> week_events(const DriverSchedule& schedule) {
  std::vector<ScheduleEvent> out;
  out.reserve(schedule.events.size());
  for (const auto& e : schedule.events) {
    if (e.end <= 0) continue;
    auto c = e;
    c.start = std::max<Minutes>(c.start, 0);
    out.push_back(c);
  }
  return out;
}

/// Parking events of the simulated week; position k is `parking_index` k.
inline std::vector<ScheduleEvent> week_parkings(const DriverSchedule& schedule) {
  std::vector<ScheduleEvent> out;
  for (const auto& e : week_events(schedule))
    if (e.is_parking()) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// file formats

struct ScheduleFormat {
  char delimiter = ',';
};

inline constexpr std::string_view kScheduleHeader = "driver_id,event_kind,start_min,end_min,purpose,energy_kwh,region_id";
inline constexpr std::string_view kRegionHeader = "region_id,name,urbanization";

namespace detail {

template <typename T>
bool parse_number(const std::string& s, T& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

inline bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

/// Maps header names to column positions; every required name must appear.
inline std::vector<std::size_t> column_positions(const std::string& header_line, char delim,
                                                 const std::vector<std::string>& required,
                                                 const std::string& what) {
  const auto names = split(trim(header_line), delim);
  std::vector<std::size_t> pos;
  for (const auto& r : required) {
    const auto it = std::find_if(names.begin(), names.end(), [&](const std::string& n) { return trim(n) == r; });
    if (it == names.end()) throw InputError(fmt::format("{}: header is missing column '{}'", what, r));
    pos.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  return pos;
}

}  // namespace detail

inline std::vector<Region> load_regions(std::istream& in, char delimiter = ',') {
  std::vector<Region> regions;
  std::string line;
  if (!std::getline(in, line)) return regions;
  const auto cols = detail::column_positions(line, delimiter, {"region_id", "name", "urbanization"}, "region file");
  int line_no = 1;
  std::unordered_set<RegionId> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), delimiter);
    auto field = [&](std::size_t c) -> std::string {
      if (cols[c] >= f.size()) throw InputError(fmt::format("region file line {}: missing field", line_no));
      return trim(f[cols[c]]);
    };
    Region r;
    if (!detail::parse_number(field(0), r.id))
      throw InputError(fmt::format("region file line {}: bad region_id '{}'", line_no, field(0)));
    r.name = field(1);
    const auto u = urbanization_from_name(field(2));
    if (!u) throw InputError(fmt::format("region file line {}: bad urbanization '{}'", line_no, field(2)));
    r.urbanization = *u;
    if (!seen.insert(r.id).second)
      throw InputError(fmt::format("region file line {}: duplicate region_id {}", line_no, r.id));
    regions.push_back(std::move(r));
  }
  return regions;
}

inline void write_regions(std::ostream& out, const std::vector<Region>& regions) {
  out << kRegionHeader << '\n';
  for (const auto& r : regions) out << fmt::format("{},{},{}\n", r.id, r.name, urbanization_name(r.urbanization));
}

/// Reads a schedule file. Rows of one driver keep their file order; drivers
/// are returned sorted by id. Schema problems throw InputError, chronology
/// problems throw InvariantError naming the driver and event index. When
/// `regions` is non-empty every referenced region must be listed.
inline FleetScenario load_fleet(std::istream& in, const ScheduleFormat& format = {},
                                std::vector<Region> regions = {}) {
  FleetScenario scenario;
  scenario.regions = std::move(regions);
  std::string line;
  if (!std::getline(in, line)) return scenario;
  if (trim(line).empty()) return scenario;
  const char d = format.delimiter;
  const auto cols = detail::column_positions(
      line, d, {"driver_id", "event_kind", "start_min", "end_min", "purpose", "energy_kwh", "region_id"},
      "schedule file");

  std::unordered_set<RegionId> known;
  for (const auto& r : scenario.regions) known.insert(r.id);

  std::map<DriverId, DriverSchedule> by_driver;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), d);
    auto field = [&](std::size_t c) -> std::string {
      if (cols[c] >= f.size()) throw InputError(fmt::format("schedule file line {}: missing field", line_no));
      return trim(f[cols[c]]);
    };
    auto fail = [&](std::string_view what) {
      return InputError(fmt::format("schedule file line {}: {}", line_no, what));
    };
    DriverId id = 0;
    if (!detail::parse_number(field(0), id)) throw fail(fmt::format("bad driver_id '{}'", field(0)));
    ScheduleEvent e;
    const auto kind = field(1);
    if (kind == "P")
      e.kind = EventKind::Parking;
    else if (kind == "T")
      e.kind = EventKind::Trip;
    else
      throw fail(fmt::format("bad event_kind '{}'", kind));
    if (!detail::parse_number(field(2), e.start)) throw fail(fmt::format("bad start_min '{}'", field(2)));
    if (!detail::parse_number(field(3), e.end)) throw fail(fmt::format("bad end_min '{}'", field(3)));
    const auto purpose = field(4);
    const auto energy = field(5);
    if (e.is_parking()) {
      const auto p = purpose_from_code(purpose);
      if (!p) throw fail(fmt::format("parking row needs purpose H|W|L|S|O, got '{}'", purpose));
      if (!energy.empty()) throw fail("parking row must leave energy_kwh empty");
      e.purpose = *p;
    } else {
      if (!purpose.empty()) throw fail("trip row must leave purpose empty");
      if (!detail::parse_real(energy, e.energy_kwh)) throw fail(fmt::format("bad energy_kwh '{}'", energy));
    }
    if (!detail::parse_number(field(6), e.region)) throw fail(fmt::format("bad region_id '{}'", field(6)));
    if (!known.empty() && !known.count(e.region)) throw fail(fmt::format("unknown region_id {}", e.region));
    auto& sched = by_driver[id];
    sched.driver_id = id;
    sched.events.push_back(e);
  }

  // Every failing driver is listed, one line each.
  std::string failures;
  std::size_t failed = 0;
  scenario.drivers.reserve(by_driver.size());
  for (auto& [id, sched] : by_driver) {
    const auto v = validate_schedule(sched);
    if (!v.ok()) {
      if (++failed <= 50)
        failures += fmt::format("{}chronology error for driver {} at event index {}: {}", failures.empty() ? "" : "\n",
                                id, v.violations.front().index, v.violations.front().message);
      continue;
    }
    scenario.drivers.push_back(std::move(sched));
  }
  if (failed > 50) failures += fmt::format("\n... {} drivers failed validation", failed);
  if (failed) throw InvariantError(failures);
  return scenario;
}

inline void write_schedule_rows(std::ostream& out, const DriverSchedule& s) {
  for (const auto& e : s.events) {
    if (e.is_parking())
      out << fmt::format("{},P,{},{},{},,{}\n", s.driver_id, e.start, e.end, purpose_code(e.purpose), e.region);
    else
      out << fmt::format("{},T,{},{},,{:.6f},{}\n", s.driver_id, e.start, e.end, e.energy_kwh, e.region);
  }
}

inline void write_schedules(std::ostream& out, const std::vector<DriverSchedule>& drivers) {
  out << kScheduleHeader << '\n';
  for (const auto& s : drivers) write_schedule_rows(out, s);
}

}  // namespace evflex
