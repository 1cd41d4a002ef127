#pragma once

// Hourly regional profiles. Energies are accumulated as integer ticks of
// 1e-9 kWh so that sums are exact and independent of event order, driver
// partitioning and thread count.

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "evflex/charge_sim.hpp"
#include "evflex/flex.hpp"
#include "evflex/types.hpp"

namespace evflex {

using Ticks = std::int64_t;
inline constexpr double kTicksPerKwh = 1e9;

inline Ticks to_ticks(double kwh) { return std::llround(kwh * kTicksPerKwh); }
inline double from_ticks(Ticks t) { return static_cast<double>(t) / kTicksPerKwh; }

struct PowerSegment {
  Minutes start = 0;
  Minutes end = 0;
  double kw = 0.0;
};

/// Calls f(hour_index, overlap_minutes) for every hour bin [start, end)
/// overlaps; times outside the week wrap around.
template <typename F>
void for_each_hour_piece(Minutes start, Minutes end, F&& f) {
  Minutes t = start;
  while (t < end) {
    const Minutes hour_abs = t >= 0 ? t / kMinutesPerHour : -((-t + kMinutesPerHour - 1) / kMinutesPerHour);
    const Minutes next = std::min<Minutes>(end, (hour_abs + 1) * kMinutesPerHour);
    f(hour_of(t), next - t);
    t = next;
  }
}

/// Average power per hour bin of a constant-power window.
inline std::vector<std::pair<int, double>> bin_power(Minutes start, Minutes end, double power_kw) {
  if (start >= end) throw InputError(fmt::format("bin_power needs start < end, got [{}, {})", start, end));
  std::vector<std::pair<int, double>> out;
  for_each_hour_piece(start, end, [&](int h, Minutes overlap) { out.emplace_back(h, power_kw * overlap / 60.0); });
  return out;
}

/// Baseline power of a charging event: the full rate, except for a final
/// minute that only delivers the remaining energy.
inline std::vector<PowerSegment> charging_segments(const ChargingEvent& ev) {
  std::vector<PowerSegment> out;
  const Minutes tc = ev.duration();
  if (tc <= 0) return out;
  if (tc > 1) out.push_back({ev.charge_start, ev.charge_end - 1, ev.rate_kw});
  const double last_kwh = ev.energy_kwh - ev.rate_kw * (tc - 1) / 60.0;
  out.push_back({ev.charge_end - 1, ev.charge_end, std::max(0.0, last_kwh * 60.0)});
  return out;
}

/// Magnitude of the downward deviation (applied with a negative sign).
inline std::vector<PowerSegment> down_segments(const FlexibilityEnvelope& env, const ChargingEvent& ev) {
  if (env.flex_case == FlexCase::Full) return charging_segments(ev);
  return {{env.down.start, env.down.end, env.rate_kw}};
}

inline std::vector<PowerSegment> up_segments(const FlexibilityEnvelope& env) {
  return {{env.up.start, env.up.end, env.rate_kw}};
}

struct RegionalProfile {
  RegionId region_id = 0;
  std::array<Ticks, kHoursPerWeek> baseline{};
  std::array<Ticks, kHoursPerWeek> lower{};
  std::array<Ticks, kHoursPerWeek> upper{};
  std::array<std::int64_t, kHoursPerWeek> plugged_in{};
  std::array<Ticks, kDaysPerWeek> charged{};
  std::array<Ticks, kDaysPerWeek> flexible{};             // available that day; overnight events count twice
  std::array<Ticks, kDaysPerWeek> flexible_attributed{};  // each event's share spread over its charging days

  // Hourly bins are one hour wide, so kWh per bin equals average kW.
  [[nodiscard]] double baseline_kw(int h) const { return from_ticks(baseline[h]); }
  [[nodiscard]] double lower_kw(int h) const { return from_ticks(lower[h]); }
  [[nodiscard]] double upper_kw(int h) const { return from_ticks(upper[h]); }
  [[nodiscard]] double charged_kwh(int d) const { return from_ticks(charged[d]); }
  [[nodiscard]] double flexible_kwh(int d) const { return from_ticks(flexible[d]); }
  [[nodiscard]] double flexible_attributed_kwh(int d) const { return from_ticks(flexible_attributed[d]); }

  RegionalProfile& operator+=(const RegionalProfile& o) {
    for (int h = 0; h < kHoursPerWeek; ++h) {
      baseline[h] += o.baseline[h];
      lower[h] += o.lower[h];
      upper[h] += o.upper[h];
      plugged_in[h] += o.plugged_in[h];
    }
    for (int d = 0; d < kDaysPerWeek; ++d) {
      charged[d] += o.charged[d];
      flexible[d] += o.flexible[d];
      flexible_attributed[d] += o.flexible_attributed[d];
    }
    return *this;
  }

  friend bool operator==(const RegionalProfile&, const RegionalProfile&) = default;
};

/// Streaming accumulator: feed one driver at a time, merge partial
/// accumulators from several workers with `merge`.
class ProfileAccumulator {
 public:
  explicit ProfileAccumulator(const std::vector<Region>& regions) {
    std::vector<RegionId> ids;
    for (const auto& r : regions) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    profiles_.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      profiles_[i].region_id = ids[i];
      index_.emplace(ids[i], i);
    }
  }

  /// Adds the charging events of one driver; `envelopes` holds that driver's
  /// envelopes in any order, matched by parking index.
  void add_driver(std::span<const ChargingEvent> events, std::span<const FlexibilityEnvelope> envelopes) {
    plugged_.clear();
    for (const auto& ev : events) {
      const FlexibilityEnvelope* env = nullptr;
      for (const auto& e : envelopes)
        if (e.parking_index == ev.parking_index && e.driver_id == ev.driver_id) env = &e;
      add_event(ev, env);
    }
    for (const auto& [idx, hours] : plugged_)
      for (int h = 0; h < kHoursPerWeek; ++h)
        if (hours.test(h)) ++profiles_[idx].plugged_in[h];
  }

  void merge(const ProfileAccumulator& other) {
    for (std::size_t i = 0; i < profiles_.size(); ++i) profiles_[i] += other.profiles_[i];
  }

  /// Regional profiles sorted by region id.
  [[nodiscard]] const std::vector<RegionalProfile>& regional() const { return profiles_; }

  [[nodiscard]] RegionalProfile national() const {
    RegionalProfile n;
    for (const auto& p : profiles_) n += p;
    return n;
  }

 private:
  std::size_t region_index(RegionId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw InputError(fmt::format("unknown region id {}", id));
    return it->second;
  }

  void add_event(const ChargingEvent& ev, const FlexibilityEnvelope* env) {
    const std::size_t idx = region_index(ev.region);
    auto& p = profiles_[idx];
    std::array<Ticks, kDaysPerWeek> day_ticks{};
    for (const auto& s : charging_segments(ev)) {
      for_each_hour_piece(s.start, s.end, [&](int h, Minutes overlap) {
        const Ticks t = to_ticks(s.kw * overlap / 60.0);
        p.baseline[h] += t;
        p.lower[h] += t;
        p.upper[h] += t;
        const int d = h / 24;
        p.charged[d] += t;
        day_ticks[d] += t;
      });
    }
    if (env) {
      for (const auto& s : down_segments(*env, ev))
        for_each_hour_piece(s.start, s.end, [&](int h, Minutes overlap) { p.lower[h] -= to_ticks(s.kw * overlap / 60.0); });
      for (const auto& s : up_segments(*env))
        for_each_hour_piece(s.start, s.end, [&](int h, Minutes overlap) { p.upper[h] += to_ticks(s.kw * overlap / 60.0); });
      const Ticks ef = to_ticks(env->flexible_energy_kwh);
      for (const auto& [d, kwh] : split_daily_energy(*env)) p.flexible[d] += ef;
      const double ratio = ev.energy_kwh > 0.0 ? std::min(1.0, env->flexible_energy_kwh / ev.energy_kwh) : 0.0;
      for (int d = 0; d < kDaysPerWeek; ++d)
        p.flexible_attributed[d] += std::llround(static_cast<double>(day_ticks[d]) * ratio);
    }
    auto it = std::find_if(plugged_.begin(), plugged_.end(), [&](const auto& x) { return x.first == idx; });
    if (it == plugged_.end()) {
      plugged_.emplace_back(idx, std::bitset<kHoursPerWeek>{});
      it = std::prev(plugged_.end());
    }
    for_each_hour_piece(ev.charge_start, ev.parking_end, [&](int h, Minutes) { it->second.set(h); });
  }

  std::vector<RegionalProfile> profiles_;
  std::unordered_map<RegionId, std::size_t> index_;
  std::vector<std::pair<std::size_t, std::bitset<kHoursPerWeek>>> plugged_;
};

struct AggregateResult {
  std::vector<RegionalProfile> regional;  // sorted by region id
  RegionalProfile national;
};

/// Aggregates events and envelopes of any number of drivers, in any order.
inline AggregateResult aggregate(std::vector<ChargingEvent> events, const std::vector<FlexibilityEnvelope>& envelopes,
                                 const std::vector<Region>& regions) {
  std::stable_sort(events.begin(), events.end(), [](const ChargingEvent& a, const ChargingEvent& b) {
    return a.driver_id != b.driver_id ? a.driver_id < b.driver_id : a.parking_index < b.parking_index;
  });
  std::map<std::pair<DriverId, std::int32_t>, const FlexibilityEnvelope*> by_key;
  for (const auto& e : envelopes) by_key[{e.driver_id, e.parking_index}] = &e;
  for (const auto& [key, env] : by_key) {
    const auto it = std::lower_bound(events.begin(), events.end(), key, [](const ChargingEvent& ev, const auto& k) {
      return std::pair{ev.driver_id, ev.parking_index} < k;
    });
    if (it == events.end() || it->driver_id != key.first || it->parking_index != key.second)
      throw InvariantError(fmt::format("envelope for driver {} parking {} has no charging event", key.first, key.second));
  }

  ProfileAccumulator acc(regions);
  std::vector<FlexibilityEnvelope> driver_envs;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    driver_envs.clear();
    while (j < events.size() && events[j].driver_id == events[i].driver_id) {
      const auto it = by_key.find({events[j].driver_id, events[j].parking_index});
      if (it != by_key.end()) driver_envs.push_back(*it->second);
      ++j;
    }
    acc.add_driver(std::span(events).subspan(i, j - i), driver_envs);
    i = j;
  }
  return {acc.regional(), acc.national()};
}

// ---------------------------------------------------------------------------
// statistics

enum class Period : std::uint8_t { Weekday, Weekend, Week };

inline bool in_period(int day, Period p) {
  switch (p) {
    case Period::Weekday: return day < 5;
    case Period::Weekend: return day >= 5;
    case Period::Week: return true;
  }
  return true;
}

/// Flexible share of charged energy over the period's days, using the
/// per-event attribution (so an overnight event is not counted twice).
/// Zero when nothing was charged.
inline double flexible_share(const RegionalProfile& profile, Period period) {
  Ticks flex = 0, charged = 0;
  for (int d = 0; d < kDaysPerWeek; ++d) {
    if (!in_period(d, period)) continue;
    flex += profile.flexible_attributed[d];
    charged += profile.charged[d];
  }
  if (charged <= 0) return 0.0;
  return static_cast<double>(flex) / static_cast<double>(charged);
}

struct FiveNumberSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::size_t count = 0;
};

/// Quantile by linear interpolation between order statistics at position
/// q * (n - 1) of the sorted sample.
inline double quantile_linear(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline FiveNumberSummary five_number_summary(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  FiveNumberSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = values.front();
  s.q1 = quantile_linear(values, 0.25);
  s.median = quantile_linear(values, 0.5);
  s.q3 = quantile_linear(values, 0.75);
  s.max = values.back();
  return s;
}

struct RegionShare {
  RegionId region_id = 0;
  Urbanization urbanization = Urbanization::Urban;
  double weekly_share = 0.0;
};

struct FleetSummary {
  std::map<Urbanization, FiveNumberSummary> by_level;
  std::vector<std::string> notices;
  std::vector<RegionShare> region_shares;
  double weekday_peak_kw = 0.0;
  int weekday_peak_hour = 0;
  double weekend_peak_kw = 0.0;
  int weekend_peak_hour = 0;
  double weekday_share = 0.0;
  double weekend_share = 0.0;
  double week_share = 0.0;
  double mean_upward_kw = 0.0;    // mean of upper - baseline
  double mean_downward_kw = 0.0;  // mean of baseline - lower
};

/// Regions without charged energy do not enter the per-level statistics.
inline FleetSummary summarize(const std::vector<RegionalProfile>& profiles, const RegionalProfile& national,
                              const std::vector<Region>& regions) {
  FleetSummary s;
  std::map<Urbanization, std::vector<double>> shares;
  for (const auto& p : profiles) {
    const auto it = std::find_if(regions.begin(), regions.end(), [&](const Region& r) { return r.id == p.region_id; });
    if (it == regions.end()) throw InputError(fmt::format("unknown region id {}", p.region_id));
    Ticks charged = 0;
    for (auto c : p.charged) charged += c;
    if (charged <= 0) continue;
    const double share = flexible_share(p, Period::Week);
    s.region_shares.push_back({p.region_id, it->urbanization, share});
    shares[it->urbanization].push_back(share);
  }
  for (auto level : {Urbanization::Urban, Urbanization::Periurban, Urbanization::Rural}) {
    const auto it = shares.find(level);
    if (it == shares.end()) {
      s.notices.push_back(fmt::format("no {} regions with charged energy; level omitted", urbanization_name(level)));
      continue;
    }
    s.by_level[level] = five_number_summary(it->second);
  }
  Ticks up = 0, down = 0;
  for (int h = 0; h < kHoursPerWeek; ++h) {
    const double kw = national.baseline_kw(h);
    if (h / 24 < 5) {
      if (kw > s.weekday_peak_kw) {
        s.weekday_peak_kw = kw;
        s.weekday_peak_hour = h;
      }
    } else if (kw > s.weekend_peak_kw) {
      s.weekend_peak_kw = kw;
      s.weekend_peak_hour = h;
    }
    up += national.upper[h] - national.baseline[h];
    down += national.baseline[h] - national.lower[h];
  }
  s.mean_upward_kw = from_ticks(up) / kHoursPerWeek;
  s.mean_downward_kw = from_ticks(down) / kHoursPerWeek;
  s.weekday_share = flexible_share(national, Period::Weekday);
  s.weekend_share = flexible_share(national, Period::Weekend);
  s.week_share = flexible_share(national, Period::Week);
  return s;
}

}  // namespace evflex
