#pragma once

// Per-driver charging simulation: two-day initialization from a full battery,
// then the simulated week with plug-in decisions at every parking event and
// a closure top-up on the final parking event.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "evflex/decision.hpp"
#include "evflex/fleet_data.hpp"
#include "evflex/rng.hpp"
#include "evflex/types.hpp"

namespace evflex {

struct ChargingEvent {
  DriverId driver_id = 0;
  std::int32_t parking_index = 0;  // position among the week's parking events
  Minutes charge_start = 0;        // equals the parking start
  Minutes charge_end = 0;
  Minutes parking_end = 0;
  double rate_kw = 0.0;
  double energy_kwh = 0.0;
  double target_soc = 1.0;
  double start_soc = 0.0;
  double end_soc = 0.0;
  DecisionReason reason = DecisionReason::None;
  RegionId region = 0;
  LocationPurpose purpose = LocationPurpose::Home;

  [[nodiscard]] Minutes duration() const { return charge_end - charge_start; }
  [[nodiscard]] Minutes parking_duration() const { return parking_end - charge_start; }

  friend bool operator==(const ChargingEvent&, const ChargingEvent&) = default;
};

struct ChargeSpan {
  Minutes end = 0;
  double energy_kwh = 0.0;
  double end_soc = 0.0;
};

/// Charges at `rate_kw` from `start` until `target` or `parking_end`,
/// whichever comes first. Durations are whole minutes rounded up; the last
/// minute delivers only the energy still missing, so a reached target is hit
/// exactly.
inline std::optional<ChargeSpan> charge_span(double soc, double capacity_kwh, Minutes start, Minutes parking_end,
                                             double rate_kw, double target) {
  const double needed = (target - soc) * capacity_kwh;
  if (needed <= 1e-9 || parking_end <= start) return std::nullopt;
  const double exact_minutes = needed * 60.0 / rate_kw;
  const auto full = std::max<Minutes>(1, static_cast<Minutes>(std::ceil(exact_minutes - 1e-6)));
  if (start + full <= parking_end) return ChargeSpan{start + full, needed, target};
  const Minutes available = parking_end - start;
  const double energy = rate_kw * available / 60.0;
  return ChargeSpan{parking_end, energy, std::min(target, soc + energy / capacity_kwh)};
}

/// Energy delivered by `ev` during its first `minutes` minutes.
inline double delivered_after(const ChargingEvent& ev, Minutes minutes) {
  if (minutes >= ev.duration()) return ev.energy_kwh;
  return ev.rate_kw * minutes / 60.0;
}

/// Charge target for a Positive decision: the sampled 80/100 % target, raised
/// to the smallest of {0.8, 1.0} above the arrival SOC that also covers the
/// reserve; closure risk forces 1.0. With the closure cap the target is then
/// limited to what the rest of the week can consume, never below the reserve.
template <DrawSource D>
double charge_target(const VehicleState& state, const DecisionOutcome& outcome, const DecisionContext& ctx,
                     D& draws, const SimulationConfig& c) {
  double target = sample_target_soc(draws, c);
  if (outcome.closure_risk) target = 1.0;
  const double required = outcome.reserve_short ? reserve_requirement_soc(state, ctx, c) : 0.0;
  if (!(target > state.soc && target >= required - 1e-12)) target = 1.0;
  if (c.closure_target_cap && ctx.closure) {
    const double cap = state.week_start_soc + ctx.closure->trips_after_kwh / state.capacity_kwh;
    target = std::min(target, std::max(cap, required));
  }
  return target;
}

/// Runs the charging process for a Positive decision and updates the SOC.
/// Returns nothing (a null charge) when the target does not exceed the SOC.
template <DrawSource D>
std::optional<ChargingEvent> execute_charging(VehicleState& state, const ScheduleEvent& parking,
                                              const DecisionOutcome& outcome, const DecisionContext& ctx, D& draws,
                                              const SimulationConfig& c) {
  if (outcome.decision != Decision::Positive) return std::nullopt;
  const double target = charge_target(state, outcome, ctx, draws, c);
  const double rate = rate_for_purpose(parking.purpose, c.rates);
  const auto span = charge_span(state.soc, state.capacity_kwh, parking.start, parking.end, rate, target);
  if (!span) return std::nullopt;
  ChargingEvent ev;
  ev.charge_start = parking.start;
  ev.charge_end = span->end;
  ev.parking_end = parking.end;
  ev.rate_kw = rate;
  ev.energy_kwh = span->energy_kwh;
  ev.target_soc = target;
  ev.start_soc = state.soc;
  ev.end_soc = span->end_soc;
  ev.reason = outcome.reason;
  ev.region = parking.region;
  ev.purpose = parking.purpose;
  state.soc = span->end_soc;
  return ev;
}

// ---------------------------------------------------------------------------

enum class DriverFlag : std::uint8_t {
  None,
  TripExceedsCapacity,  // a single trip needs more than a full battery
  Stranded,             // the SOC would have dropped below zero
  FloorUnreachable,     // departed below the SOC floor despite the forcing rules
};

enum class ClosureStatus : std::uint8_t { Closed, Shortfall, Surplus };

inline constexpr std::string_view closure_status_name(ClosureStatus s) {
  switch (s) {
    case ClosureStatus::Closed: return "closed";
    case ClosureStatus::Shortfall: return "shortfall";
    case ClosureStatus::Surplus: return "surplus";
  }
  return "?";
}

inline constexpr std::string_view driver_flag_name(DriverFlag f) {
  switch (f) {
    case DriverFlag::None: return "none";
    case DriverFlag::TripExceedsCapacity: return "trip_exceeds_capacity";
    case DriverFlag::Stranded: return "stranded";
    case DriverFlag::FloorUnreachable: return "floor_unreachable";
  }
  return "?";
}

struct ClosureReport {
  double week_start_soc = 1.0;
  double week_end_soc = 1.0;
  double mismatch_kwh = 0.0;  // (end - start) * capacity
  ClosureStatus status = ClosureStatus::Closed;
};

struct SocPoint {
  Minutes t = 0;
  double soc = 0.0;
};

struct DriverResult {
  DriverId driver_id = 0;
  double capacity_kwh = 0.0;
  std::vector<ChargingEvent> events;  // simulated week only
  std::vector<SocPoint> trajectory;   // week breakpoints; SOC is linear in between
  ClosureReport closure;
  DriverFlag flag = DriverFlag::None;
  std::size_t floor_violations = 0;  // week departures below the floor
  std::size_t null_charges = 0;
  double week_trip_kwh = 0.0;
  double week_charged_kwh = 0.0;

  [[nodiscard]] bool excluded() const { return flag != DriverFlag::None; }
};

struct SimulationOptions {
  bool record_trajectory = true;
};

template <DrawSource D>
DriverResult simulate_driver(const DriverSchedule& schedule, double capacity_kwh, D& draws,
                             const SimulationConfig& c, const SimulationOptions& options = {}) {
  DriverResult r;
  r.driver_id = schedule.driver_id;
  r.capacity_kwh = capacity_kwh;
  const auto& ev = schedule.events;
  const std::size_t n = ev.size();
  if (n == 0) return r;
  const double cap = capacity_kwh;

  auto trip_kwh = [&](std::size_t i) { return ev[i].energy_kwh * c.energy_factor; };
  auto potential_kwh = [&](std::size_t j) {
    const auto& p = ev[j];
    const Minutes dur = p.end - std::max<Minutes>(p.start, 0);
    if (j + 1 != n && dur <= c.min_parking_minutes) return 0.0;
    return std::min(rate_for_purpose(p.purpose, c.rates) * dur / 60.0, cap);
  };

  // Lookahead tables, filled back to front.
  // `chain` is the trip energy up to the next parking event long enough to
  // charge at.
  std::vector<double> reserve(n), trips_after(n), recharge_after(n);
  {
    double nearest = 0.0, second = 0.0, chain = 0.0, trips = 0.0, recharge = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      reserve[k] = std::max(nearest + second, chain);
      trips_after[k] = trips;
      recharge_after[k] = recharge;
      if (ev[k].is_trip()) {
        second = nearest;
        nearest = trip_kwh(k);
        chain += nearest;
        trips += nearest;
        if (nearest > cap + 1e-9) r.flag = DriverFlag::TripExceedsCapacity;
      } else {
        recharge += potential_kwh(k);
        if (ev[k].duration() > c.min_parking_minutes) chain = 0.0;
      }
    }
  }

  VehicleState state{cap, 1.0, 1.0};
  bool week_started = false;
  std::int32_t week_parking = 0;
  auto start_week = [&](double soc_at_zero) {
    week_started = true;
    state.week_start_soc = soc_at_zero;
    if (options.record_trajectory) r.trajectory.push_back({0, soc_at_zero});
  };
  auto record = [&](Minutes t, double soc) {
    if (options.record_trajectory && week_started) r.trajectory.push_back({t, soc});
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = ev[i];
    if (!week_started && e.start >= 0) start_week(state.soc);

    if (e.is_trip()) {
      if (!week_started && e.end > 0) start_week(state.soc);
      const double kwh = trip_kwh(i);
      if (week_started) {
        if (state.soc < c.soc_floor - 1e-12) {
          ++r.floor_violations;
          if (r.flag == DriverFlag::None) r.flag = DriverFlag::FloorUnreachable;
        }
        r.week_trip_kwh += kwh;
      }
      state.soc -= kwh / cap;
      if (state.soc < -1e-12) {
        if (r.flag == DriverFlag::None) r.flag = DriverFlag::Stranded;
      }
      if (state.soc < 0.0) state.soc = 0.0;
      record(e.end, state.soc);
      continue;
    }

    const bool final_event = i + 1 == n;
    if (e.start < 0) {
      // Decided during initialization; a charge may run past the week start.
      DecisionContext ctx{reserve[i], std::nullopt};
      const auto outcome = decide_charge(state, e, ctx, draws, c);
      const double arrival = state.soc;
      const auto charge = execute_charging(state, e, outcome, ctx, draws, c);
      if (e.end > 0) {
        double soc_at_zero = state.soc;
        if (charge && charge->charge_end > 0) {
          auto week_part = *charge;
          const double before = delivered_after(*charge, -charge->charge_start);
          soc_at_zero = arrival + before / cap;
          week_part.driver_id = schedule.driver_id;
          week_part.parking_index = week_parking;
          week_part.charge_start = 0;
          week_part.energy_kwh = charge->energy_kwh - before;
          week_part.start_soc = soc_at_zero;
          start_week(soc_at_zero);
          r.week_charged_kwh += week_part.energy_kwh;
          r.events.push_back(week_part);
          record(week_part.charge_end, week_part.end_soc);
        } else {
          start_week(soc_at_zero);
        }
        ++week_parking;
        record(e.end, state.soc);
      }
      if (final_event) break;
      continue;
    }

    std::optional<ChargingEvent> charge;
    if (final_event) {
      if (state.soc < state.week_start_soc - 1e-12) {
        const double rate = rate_for_purpose(e.purpose, c.rates);
        if (const auto span = charge_span(state.soc, cap, e.start, e.end, rate, state.week_start_soc)) {
          ChargingEvent ce;
          ce.charge_start = e.start;
          ce.charge_end = span->end;
          ce.parking_end = e.end;
          ce.rate_kw = rate;
          ce.energy_kwh = span->energy_kwh;
          ce.target_soc = state.week_start_soc;
          ce.start_soc = state.soc;
          ce.end_soc = span->end_soc;
          ce.reason = DecisionReason::WeekClosureRisk;
          ce.region = e.region;
          ce.purpose = e.purpose;
          state.soc = span->end_soc;
          charge = ce;
        }
      }
    } else {
      DecisionContext ctx{reserve[i], ClosureOutlook{trips_after[i], recharge_after[i]}};
      const auto outcome = decide_charge(state, e, ctx, draws, c);
      charge = execute_charging(state, e, outcome, ctx, draws, c);
      if (outcome.decision == Decision::Positive && !charge) ++r.null_charges;
    }
    if (charge) {
      charge->driver_id = schedule.driver_id;
      charge->parking_index = week_parking;
      r.week_charged_kwh += charge->energy_kwh;
      record(charge->charge_end, charge->end_soc);
      r.events.push_back(*charge);
    }
    ++week_parking;
    record(e.end, state.soc);
  }
  if (!week_started) start_week(state.soc);

  auto& cl = r.closure;
  cl.week_start_soc = state.week_start_soc;
  cl.week_end_soc = state.soc;
  cl.mismatch_kwh = (state.soc - state.week_start_soc) * cap;
  if (std::abs(cl.mismatch_kwh) <= c.closure_tolerance_kwh)
    cl.status = ClosureStatus::Closed;
  else
    cl.status = cl.mismatch_kwh < 0.0 ? ClosureStatus::Shortfall : ClosureStatus::Surplus;
  return r;
}

/// Simulation with the driver's own random stream, seeded from
/// (global_seed, driver_id) so that batch order and threading do not matter.
inline DriverResult simulate_driver(const DriverSchedule& schedule, double capacity_kwh, std::uint64_t global_seed,
                                    const SimulationConfig& c, const SimulationOptions& options = {}) {
  RandomDraws draws(stream_seed(global_seed, schedule.driver_id, StreamDomain::Simulation));
  return simulate_driver(schedule, capacity_kwh, draws, c, options);
}

}  // namespace evflex
