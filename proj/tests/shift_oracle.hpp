#pragma once

// Minute-resolution rescheduling oracle for a single charging event. Works
// directly on per-minute energies, independent of the hourly binning code.

#include <algorithm>
#include <string>
#include <vector>

#include "evflex/evflex.hpp"

namespace evflex::testing {

struct ShiftCheck {
  bool ok = true;
  std::string why;
  double min_before_baseline_end = 0.0;  // least energy any full-energy profile delivers by t_c^end
  double late_profile_kwh = 0.0;
};

/// Per-minute baseline energy: full rate except the last charging minute.
inline std::vector<double> baseline_minutes(const ChargingEvent& ev) {
  std::vector<double> out(static_cast<std::size_t>(ev.parking_end - ev.charge_start), 0.0);
  const Minutes tc = ev.duration();
  for (Minutes m = 0; m + 1 < tc; ++m) out[m] = ev.rate_kw / 60.0;
  out[tc - 1] = ev.energy_kwh - ev.rate_kw * (tc - 1) / 60.0;
  return out;
}

inline ShiftCheck check_envelope_by_shifting(const ChargingEvent& ev, const FlexibilityEnvelope& env) {
  ShiftCheck r;
  auto fail = [&](std::string why) {
    if (r.ok) r.why = std::move(why);
    r.ok = false;
  };
  const Minutes p0 = ev.charge_start;
  const auto n = static_cast<std::size_t>(ev.parking_end - p0);
  const auto base = baseline_minutes(ev);
  const double per_min = ev.rate_kw / 60.0;
  std::vector<double> lo(n), hi(n);
  for (std::size_t m = 0; m < n; ++m) {
    const Minutes t = p0 + static_cast<Minutes>(m);
    double down = 0.0, up = 0.0;
    if (env.flex_case == FlexCase::Full) {
      if (t >= env.down.start && t < env.down.end) down = base[m];
    } else if (t >= env.down.start && t < env.down.end) {
      down = per_min;
    }
    if (t >= env.up.start && t < env.up.end) up = per_min;
    lo[m] = base[m] - down;
    hi[m] = base[m] + up;
    if (lo[m] < -1e-12) fail("lower bound below zero at minute " + std::to_string(t));
    if (hi[m] > per_min + 1e-12) fail("upper bound above the charging rate at minute " + std::to_string(t));
  }

  // Latest feasible profile: mandatory lower bounds, then fill from the
  // parking end backwards up to the upper bound.
  std::vector<double> late(lo);
  double remaining = ev.energy_kwh;
  for (double x : lo) remaining -= x;
  if (remaining < -1e-9) fail("lower bounds alone exceed the event energy");
  for (std::size_t k = n; k-- > 0 && remaining > 0.0;) {
    const double add = std::min(hi[k] - lo[k], remaining);
    late[k] += add;
    remaining -= add;
  }
  if (remaining > 1e-9) fail("no profile within bounds delivers the full energy by parking end");
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (late[m] < lo[m] - 1e-12 || late[m] > hi[m] + 1e-12) fail("late profile leaves the bounds");
    total += late[m];
  }
  r.late_profile_kwh = total;

  // Least energy delivered before the baseline completes, over all profiles
  // within bounds that still deliver the full energy.
  const auto split = static_cast<std::size_t>(ev.charge_end - p0);
  double lo_before = 0.0, hi_after = 0.0;
  for (std::size_t m = 0; m < split; ++m) lo_before += lo[m];
  for (std::size_t m = split; m < n; ++m) hi_after += hi[m];
  r.min_before_baseline_end = std::max(lo_before, ev.energy_kwh - hi_after);
  double late_before = 0.0;
  for (std::size_t m = 0; m < split; ++m) late_before += late[m];
  if (std::abs(late_before - r.min_before_baseline_end) > 1e-9) fail("late profile is not the earliest-minimal one");
  if (r.min_before_baseline_end < ev.energy_kwh - env.flexible_energy_kwh - 1e-9)
    fail("delivered-by-deadline energy falls below E_ch - E_f");
  return r;
}

}  // namespace evflex::testing
