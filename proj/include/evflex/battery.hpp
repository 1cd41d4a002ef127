#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "evflex/config.hpp"
#include "evflex/types.hpp"

namespace evflex {

struct BatteryMenu {
  std::vector<double> capacities{70, 80, 90, 100, 110, 120};
  std::vector<double> shares{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};

  void validate() const {
    if (capacities.empty() || capacities.size() != shares.size())
      throw InputError("battery menu needs one share per capacity");
    double total = 0.0;
    for (std::size_t i = 0; i < capacities.size(); ++i) {
      if (!(capacities[i] > 0.0)) throw InputError(fmt::format("battery capacity {} must be > 0", capacities[i]));
      if (i > 0 && !(capacities[i] > capacities[i - 1]))
        throw InputError("battery capacities must be strictly ascending");
      if (!(shares[i] >= 0.0 && shares[i] <= 1.0))
        throw InputError(fmt::format("battery share {} must lie in [0,1]", shares[i]));
      total += shares[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw InputError(fmt::format("battery shares must sum to 1, got {:.12f}", total));
  }

  /// [battery] section: one `<capacity_kwh> = <share>` line per menu entry.
  static BatteryMenu from_config(const KeyValueConfig& kv) {
    BatteryMenu menu;
    const auto keys = kv.keys_in("battery");
    if (keys.empty()) return menu;
    std::vector<std::pair<double, double>> rows;
    for (const auto& key : keys) {
      const auto* e = kv.find("battery." + key);
      KeyValueConfig::Entry as_key{key, e->line};
      rows.emplace_back(kv.parse_double("battery." + key, as_key), kv.parse_double("battery." + key, *e));
    }
    menu.capacities.clear();
    menu.shares.clear();
    for (const auto& [c, s] : rows) {
      menu.capacities.push_back(c);
      menu.shares.push_back(s);
    }
    menu.validate();
    return menu;
  }
};

/// Largest daily trip energy over the seven simulated days (trips bucketed by
/// departure day; prefix trips are ignored).
inline double max_daily_energy(const DriverSchedule& schedule) {
  std::array<double, kDaysPerWeek> per_day{};
  for (const auto& e : schedule.events)
    if (e.is_trip() && e.start >= 0 && e.start < kMinutesPerWeek) per_day[day_of(e.start)] += e.energy_kwh;
  return *std::max_element(per_day.begin(), per_day.end());
}

/// Block sizes that split `n` items by `shares` with largest-remainder
/// rounding; ties go to the earlier (smaller) capacity.
inline std::vector<std::size_t> largest_remainder_sizes(std::size_t n, const std::vector<double>& shares) {
  std::vector<std::size_t> sizes(shares.size());
  std::vector<double> remainder(shares.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    const double quota = shares[k] * static_cast<double>(n);
    // Snap quotas within rounding noise of an integer, e.g. 6 * (1/6).
    const double snapped = std::abs(quota - std::round(quota)) < 1e-9 ? std::round(quota) : quota;
    sizes[k] = static_cast<std::size_t>(std::floor(snapped));
    remainder[k] = snapped - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i % order.size()]];
  return sizes;
}

struct BatteryAssignment {
  double capacity_kwh = 0.0;
  double quantile_capacity_kwh = 0.0;  // before promotion
  bool promoted = false;
  bool capped = false;  // even the largest capacity leaves less than the floor headroom
};

struct BatteryAssignmentResult {
  std::unordered_map<DriverId, BatteryAssignment> by_driver;
  std::size_t promoted = 0;
  std::size_t capped = 0;

  [[nodiscard]] double capacity(DriverId id) const { return by_driver.at(id).capacity_kwh; }
};

/// Driver id plus its largest daily energy; enough to assign batteries without
/// keeping whole schedules in memory.
struct DriverDemand {
  DriverId driver_id = 0;
  double max_daily_kwh = 0.0;
};

/// Quantile matching: drivers sorted by (max daily energy, id) are cut into
/// contiguous blocks sized by the menu shares. Any driver whose worst day
/// exceeds `headroom` times its capacity moves up to the smallest capacity
/// that covers it, or to the largest capacity (flagged as capped).
inline BatteryAssignmentResult assign_batteries(std::vector<DriverDemand> demand, const BatteryMenu& menu,
                                                double headroom = 0.85) {
  menu.validate();
  if (demand.empty()) throw InputError("cannot assign batteries to an empty fleet");
  std::sort(demand.begin(), demand.end(), [](const DriverDemand& a, const DriverDemand& b) {
    return a.max_daily_kwh != b.max_daily_kwh ? a.max_daily_kwh < b.max_daily_kwh : a.driver_id < b.driver_id;
  });
  const auto sizes = largest_remainder_sizes(demand.size(), menu.shares);
  BatteryAssignmentResult result;
  result.by_driver.reserve(demand.size());
  std::size_t k = 0, used = 0;
  for (const auto& d : demand) {
    while (used == sizes[k]) {
      ++k;
      used = 0;
    }
    ++used;
    BatteryAssignment a;
    a.quantile_capacity_kwh = menu.capacities[k];
    a.capacity_kwh = a.quantile_capacity_kwh;
    if (d.max_daily_kwh > headroom * a.capacity_kwh) {
      a.promoted = true;
      const auto it = std::find_if(menu.capacities.begin(), menu.capacities.end(),
                                   [&](double c) { return d.max_daily_kwh <= headroom * c; });
      if (it == menu.capacities.end()) {
        a.capacity_kwh = menu.capacities.back();
        a.capped = true;
        ++result.capped;
      } else {
        a.capacity_kwh = *it;
      }
      if (a.capacity_kwh == a.quantile_capacity_kwh) a.promoted = false;
      if (a.promoted) ++result.promoted;
    }
    result.by_driver.emplace(d.driver_id, a);
  }
  return result;
}

inline BatteryAssignmentResult assign_batteries(const FleetScenario& fleet, const BatteryMenu& menu,
                                                double headroom = 0.85) {
  std::vector<DriverDemand> demand;
  demand.reserve(fleet.drivers.size());
  for (const auto& s : fleet.drivers) demand.push_back({s.driver_id, max_daily_energy(s)});
  return assign_batteries(std::move(demand), menu, headroom);
}

}  // namespace evflex
