#pragma once

// Delimited text formats for charging events, envelopes and report tables.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "evflex/aggregate.hpp"
#include "evflex/charge_sim.hpp"
#include "evflex/fleet_data.hpp"
#include "evflex/flex.hpp"

namespace evflex {

inline constexpr std::string_view kEventHeader =
    "driver_id,parking_index,charge_start_min,charge_end_min,rate_kw,energy_kwh,target_soc,start_soc,end_soc,"
    "reason,region_id,purpose,parking_end_min";

inline constexpr std::string_view kEnvelopeHeader =
    "driver_id,parking_index,case,down_start,down_end,dead_start,dead_end,up_start,up_end,rate_kw,"
    "flexible_energy_kwh,days_credited";

inline void write_event_row(std::ostream& out, const ChargingEvent& e) {
  out << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{},{}\n", e.driver_id, e.parking_index,
                     e.charge_start, e.charge_end, e.rate_kw, e.energy_kwh, e.target_soc, e.start_soc, e.end_soc,
                     reason_name(e.reason), e.region, purpose_code(e.purpose), e.parking_end);
}

inline void write_events(std::ostream& out, const std::vector<ChargingEvent>& events) {
  out << kEventHeader << '\n';
  for (const auto& e : events) write_event_row(out, e);
}

/// Reads an event file and checks each row's own invariants.
inline std::vector<ChargingEvent> read_events(std::istream& in) {
  std::vector<ChargingEvent> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (trim(line) != kEventHeader) throw InputError("event file: unexpected header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    auto fail = [&](std::string_view what) { return InputError(fmt::format("event file line {}: {}", line_no, what)); };
    if (f.size() != 13) throw fail(fmt::format("expected 13 fields, got {}", f.size()));
    ChargingEvent e;
    bool ok = detail::parse_number(f[0], e.driver_id) && detail::parse_number(f[1], e.parking_index) &&
              detail::parse_number(f[2], e.charge_start) && detail::parse_number(f[3], e.charge_end) &&
              detail::parse_real(f[4], e.rate_kw) && detail::parse_real(f[5], e.energy_kwh) &&
              detail::parse_real(f[6], e.target_soc) && detail::parse_real(f[7], e.start_soc) &&
              detail::parse_real(f[8], e.end_soc) && detail::parse_number(f[10], e.region) &&
              detail::parse_number(f[12], e.parking_end);
    if (!ok) throw fail("malformed number");
    const auto reason = reason_from_name(f[9]);
    const auto purpose = purpose_from_code(f[11]);
    if (!reason || !purpose) throw fail("bad reason or purpose");
    e.reason = *reason;
    e.purpose = *purpose;
    auto violated = [&](std::string_view what) {
      return InvariantError(fmt::format("event file line {}: {}", line_no, what));
    };
    if (!(e.charge_start < e.charge_end && e.charge_end <= e.parking_end))
      throw violated("requires charge_start < charge_end <= parking_end");
    if (e.reason == DecisionReason::None) throw violated("charging event without a positive decision reason");
    if (!(e.rate_kw > 0.0) || e.energy_kwh < 0.0 || e.energy_kwh > e.rate_kw * e.duration() / 60.0 + 1e-5)
      throw violated("energy exceeds rate times charging time");
    for (double s : {e.start_soc, e.end_soc})
      if (s < 0.0 || s > 1.0 + 1e-9) throw violated("SOC outside [0,1]");
    out.push_back(e);
  }
  return out;
}

inline void write_envelope_row(std::ostream& out, const FlexibilityEnvelope& e) {
  const std::string dead_start = e.dead ? std::to_string(e.dead->start) : "";
  const std::string dead_end = e.dead ? std::to_string(e.dead->end) : "";
  out << fmt::format("{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{}\n", e.driver_id, e.parking_index,
                     flex_case_code(e.flex_case), e.down.start, e.down.end, dead_start, dead_end, e.up.start, e.up.end,
                     e.rate_kw, e.flexible_energy_kwh, days_credited_text(e));
}

inline void write_envelopes(std::ostream& out, const std::vector<FlexibilityEnvelope>& envelopes) {
  out << kEnvelopeHeader << '\n';
  for (const auto& e : envelopes) write_envelope_row(out, e);
}

inline std::vector<FlexibilityEnvelope> read_envelopes(std::istream& in) {
  std::vector<FlexibilityEnvelope> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (trim(line) != kEnvelopeHeader) throw InputError("envelope file: unexpected header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    auto fail = [&](std::string_view what) {
      return InputError(fmt::format("envelope file line {}: {}", line_no, what));
    };
    if (f.size() != 12) throw fail(fmt::format("expected 12 fields, got {}", f.size()));
    FlexibilityEnvelope e;
    bool ok = detail::parse_number(f[0], e.driver_id) && detail::parse_number(f[1], e.parking_index) &&
              detail::parse_number(f[3], e.down.start) && detail::parse_number(f[4], e.down.end) &&
              detail::parse_number(f[7], e.up.start) && detail::parse_number(f[8], e.up.end) &&
              detail::parse_real(f[9], e.rate_kw) && detail::parse_real(f[10], e.flexible_energy_kwh);
    if (!ok) throw fail("malformed number");
    if (f[2] == "F") {
      e.flex_case = FlexCase::Full;
      if (!f[5].empty() || !f[6].empty()) throw fail("Full case has no dead window");
    } else if (f[2] == "P") {
      e.flex_case = FlexCase::Partial;
      TimeWindow dead;
      if (!detail::parse_number(f[5], dead.start) || !detail::parse_number(f[6], dead.end))
        throw fail("Partial case needs a dead window");
      e.dead = dead;
    } else {
      throw fail(fmt::format("bad case '{}'", f[2]));
    }
    if (e.down.empty() || e.up.empty() || e.flexible_energy_kwh < 0.0)
      throw InvariantError(fmt::format("envelope file line {}: empty window or negative energy", line_no));
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// report tables

inline void write_profiles(std::ostream& out, const std::vector<RegionalProfile>& profiles) {
  out << "region_id,hour_index,baseline_kw,lower_kw,upper_kw,plugged_in_count\n";
  for (const auto& p : profiles)
    for (int h = 0; h < kHoursPerWeek; ++h)
      out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{}\n", p.region_id, h, p.baseline_kw(h), p.lower_kw(h),
                         p.upper_kw(h), p.plugged_in[h]);
}

inline void write_daily(std::ostream& out, const std::vector<RegionalProfile>& profiles) {
  out << "region_id,day_index,charged_kwh,flexible_kwh,flexible_attributed_kwh\n";
  for (const auto& p : profiles)
    for (int d = 0; d < kDaysPerWeek; ++d)
      out << fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", p.region_id, d, p.charged_kwh(d), p.flexible_kwh(d),
                         p.flexible_attributed_kwh(d));
}

inline void write_national(std::ostream& out, const RegionalProfile& n) {
  out << "hour_index,baseline_kw,lower_kw,upper_kw,plugged_in_count\n";
  for (int h = 0; h < kHoursPerWeek; ++h)
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", h, n.baseline_kw(h), n.lower_kw(h), n.upper_kw(h),
                       n.plugged_in[h]);
}

inline void write_national_daily(std::ostream& out, const RegionalProfile& n) {
  out << "day_index,charged_kwh,flexible_kwh,flexible_attributed_kwh\n";
  for (int d = 0; d < kDaysPerWeek; ++d)
    out << fmt::format("{},{:.6f},{:.6f},{:.6f}\n", d, n.charged_kwh(d), n.flexible_kwh(d),
                       n.flexible_attributed_kwh(d));
}

inline void write_boxplot(std::ostream& out, const FleetSummary& s) {
  out << "urbanization,region_id,weekly_flexible_share\n";
  for (const auto& r : s.region_shares)
    out << fmt::format("{},{},{:.6f}\n", urbanization_name(r.urbanization), r.region_id, r.weekly_share);
}

inline void write_summary(std::ostream& out, const FleetSummary& s) {
  out << "# quantiles: linear interpolation at q*(n-1) of the sorted weekly shares\n";
  out << fmt::format("national.weekday_peak_kw = {:.6f}\n", s.weekday_peak_kw);
  out << fmt::format("national.weekday_peak_hour = {}\n", s.weekday_peak_hour);
  out << fmt::format("national.weekend_peak_kw = {:.6f}\n", s.weekend_peak_kw);
  out << fmt::format("national.weekend_peak_hour = {}\n", s.weekend_peak_hour);
  out << fmt::format("national.flexible_share.weekday = {:.6f}\n", s.weekday_share);
  out << fmt::format("national.flexible_share.weekend = {:.6f}\n", s.weekend_share);
  out << fmt::format("national.flexible_share.week = {:.6f}\n", s.week_share);
  out << fmt::format("national.mean_upward_kw = {:.6f}\n", s.mean_upward_kw);
  out << fmt::format("national.mean_downward_kw = {:.6f}\n", s.mean_downward_kw);
  for (const auto& [level, f] : s.by_level) {
    const auto name = urbanization_name(level);
    out << fmt::format("{}.regions = {}\n", name, f.count);
    out << fmt::format("{}.share.min = {:.6f}\n", name, f.min);
    out << fmt::format("{}.share.q1 = {:.6f}\n", name, f.q1);
    out << fmt::format("{}.share.median = {:.6f}\n", name, f.median);
    out << fmt::format("{}.share.q3 = {:.6f}\n", name, f.q3);
    out << fmt::format("{}.share.max = {:.6f}\n", name, f.max);
  }
  for (const auto& r : s.region_shares)
    out << fmt::format("region.{}.share = {:.6f}\n", r.region_id, r.weekly_share);
  for (const auto& n : s.notices) out << "# notice: " << n << '\n';
}

}  // namespace evflex
