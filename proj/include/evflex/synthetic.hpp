#pragma once

// Synthetic fleet generator. A desk-scale stand-in for activity-based travel
// demand output: each driver is a commuter, an errand runner or a
// low-mobility driver, and every schedule carries the two-day
// initialization prefix (a copy of the first two weekdays).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "evflex/config.hpp"
#include "evflex/fleet_data.hpp"
#include "evflex/rng.hpp"
#include "evflex/types.hpp"

namespace evflex {

struct RegionSpec {
  Region region;
  double home_weight = 1.0;
  double work_weight = 1.0;
};

struct SyntheticConfig {
  long long drivers = 1000;
  double commuter_share = 0.5;
  double low_mobility_share = 0.2;  // fraction of non-commuters

  double mean_commute_energy_kwh = 5.0;
  double mean_trip_energy_kwh = 3.0;
  double trip_energy_cv = 0.4;
  double max_trip_energy_kwh = 40.0;
  double urban_energy_factor = 0.85;
  double periurban_energy_factor = 1.0;
  double rural_energy_factor = 1.3;

  double departure_mean_min = 450;  // commuter leaves home, minute of day
  double departure_sd_min = 45;
  double work_dwell_mean_min = 510;
  double work_dwell_sd_min = 60;
  double errand_departure_mean_min = 600;
  double errand_departure_sd_min = 120;
  double errand_dwell_mean_min = 75;
  double errand_dwell_sd_min = 40;
  double home_dwell_mean_min = 150;  // at home between two tours of a day
  double home_dwell_sd_min = 60;

  double errand_stops_mean = 1.8;  // stops per errand tour, in [1, 3]
  double after_work_errand_prob = 0.25;
  double evening_leisure_prob = 0.2;
  double low_mobility_trip_prob = 0.4;
  double weekend_tour_prob = 0.45;

  double leisure_weight = 0.45;
  double shop_weight = 0.35;
  double other_weight = 0.20;

  std::string season = "winter";
  std::vector<RegionSpec> regions = {
      {{1, "urban", Urbanization::Urban}, 1.0, 2.0},
      {{2, "periurban", Urbanization::Periurban}, 1.0, 1.0},
      {{3, "rural", Urbanization::Rural}, 1.0, 0.5},
  };

  void validate() const {
    auto prob = [](std::string_view name, double p) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError(fmt::format("synthetic.{} must lie in [0,1], got {}", name, p));
    };
    auto positive = [](std::string_view name, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError(fmt::format("synthetic.{} must be > 0, got {}", name, v));
    };
    auto nonneg = [](std::string_view name, double v) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(fmt::format("synthetic.{} must be >= 0, got {}", name, v));
    };
    if (drivers < 0) throw InputError(fmt::format("synthetic.drivers must be >= 0, got {}", drivers));
    prob("commuter_share", commuter_share);
    prob("low_mobility_share", low_mobility_share);
    prob("after_work_errand_prob", after_work_errand_prob);
    prob("evening_leisure_prob", evening_leisure_prob);
    prob("low_mobility_trip_prob", low_mobility_trip_prob);
    prob("weekend_tour_prob", weekend_tour_prob);
    positive("mean_commute_energy_kwh", mean_commute_energy_kwh);
    positive("mean_trip_energy_kwh", mean_trip_energy_kwh);
    positive("max_trip_energy_kwh", max_trip_energy_kwh);
    positive("urban_energy_factor", urban_energy_factor);
    positive("periurban_energy_factor", periurban_energy_factor);
    positive("rural_energy_factor", rural_energy_factor);
    nonneg("trip_energy_cv", trip_energy_cv);
    for (auto [n, v] : {std::pair{"departure_sd_min", departure_sd_min}, {"work_dwell_sd_min", work_dwell_sd_min},
                        {"errand_departure_sd_min", errand_departure_sd_min},
                        {"errand_dwell_sd_min", errand_dwell_sd_min}, {"home_dwell_sd_min", home_dwell_sd_min},
                        {"leisure_weight", leisure_weight}, {"shop_weight", shop_weight},
                        {"other_weight", other_weight}})
      nonneg(n, v);
    for (auto [n, v] : {std::pair{"departure_mean_min", departure_mean_min},
                        {"work_dwell_mean_min", work_dwell_mean_min},
                        {"errand_departure_mean_min", errand_departure_mean_min},
                        {"errand_dwell_mean_min", errand_dwell_mean_min},
                        {"home_dwell_mean_min", home_dwell_mean_min}})
      positive(n, v);
    if (!(errand_stops_mean >= 1.0 && errand_stops_mean <= 3.0))
      throw InputError(fmt::format("synthetic.errand_stops_mean must lie in [1,3], got {}", errand_stops_mean));
    if (leisure_weight + shop_weight + other_weight <= 0.0)
      throw InputError("synthetic errand purpose weights must not all be zero");
    if (regions.empty()) throw InputError("synthetic config needs at least one region");
    double home = 0.0, work = 0.0;
    for (const auto& r : regions) {
      if (r.home_weight < 0.0 || r.work_weight < 0.0)
        throw InputError(fmt::format("region {} has a negative weight", r.region.id));
      home += r.home_weight;
      work += r.work_weight;
    }
    if (home <= 0.0) throw InputError("region home weights must not all be zero");
    if (commuter_share > 0.0 && work <= 0.0) throw InputError("region work weights must not all be zero");
  }

  /// Reads the [synthetic] and [regions] sections. Region lines have the form
  /// `<id> = <name>, <urban|periurban|rural>[, <home_weight>[, <work_weight>]]`.
  static SyntheticConfig from_config(const KeyValueConfig& kv) {
    SyntheticConfig c;
    const std::string s = "synthetic.";
    c.drivers = kv.get_int(s + "drivers", c.drivers);
    auto rd = [&](const char* key, double& field) { field = kv.get_double(s + key, field); };
    rd("commuter_share", c.commuter_share);
    rd("low_mobility_share", c.low_mobility_share);
    rd("mean_commute_energy_kwh", c.mean_commute_energy_kwh);
    rd("mean_trip_energy_kwh", c.mean_trip_energy_kwh);
    rd("trip_energy_cv", c.trip_energy_cv);
    rd("max_trip_energy_kwh", c.max_trip_energy_kwh);
    rd("urban_energy_factor", c.urban_energy_factor);
    rd("periurban_energy_factor", c.periurban_energy_factor);
    rd("rural_energy_factor", c.rural_energy_factor);
    rd("departure_mean_min", c.departure_mean_min);
    rd("departure_sd_min", c.departure_sd_min);
    rd("work_dwell_mean_min", c.work_dwell_mean_min);
    rd("work_dwell_sd_min", c.work_dwell_sd_min);
    rd("errand_departure_mean_min", c.errand_departure_mean_min);
    rd("errand_departure_sd_min", c.errand_departure_sd_min);
    rd("errand_dwell_mean_min", c.errand_dwell_mean_min);
    rd("errand_dwell_sd_min", c.errand_dwell_sd_min);
    rd("home_dwell_mean_min", c.home_dwell_mean_min);
    rd("home_dwell_sd_min", c.home_dwell_sd_min);
    rd("errand_stops_mean", c.errand_stops_mean);
    rd("after_work_errand_prob", c.after_work_errand_prob);
    rd("evening_leisure_prob", c.evening_leisure_prob);
    rd("low_mobility_trip_prob", c.low_mobility_trip_prob);
    rd("weekend_tour_prob", c.weekend_tour_prob);
    rd("leisure_weight", c.leisure_weight);
    rd("shop_weight", c.shop_weight);
    rd("other_weight", c.other_weight);
    c.season = kv.get_string(s + "season", c.season);

    const auto region_keys = kv.keys_in("regions");
    if (!region_keys.empty()) {
      c.regions.clear();
      for (const auto& key : region_keys) {
        const auto* e = kv.find("regions." + key);
        RegionSpec spec;
        if (!detail::parse_number(key, spec.region.id))
          throw InputError(fmt::format("{}:{}: region key must be a numeric id, got '{}'", kv.source(), e->line, key));
        const auto parts = split(e->value, ',');
        if (parts.size() < 2 || parts.size() > 4)
          throw kv.bad_value("regions." + key, *e, "'name, urbanization[, home_weight[, work_weight]]'");
        spec.region.name = trim(parts[0]);
        const auto u = urbanization_from_name(trim(parts[1]));
        if (!u) throw kv.bad_value("regions." + key, *e, "an urbanization of urban|periurban|rural");
        spec.region.urbanization = *u;
        if (parts.size() > 2 && !detail::parse_real(trim(parts[2]), spec.home_weight))
          throw kv.bad_value("regions." + key, *e, "a numeric home weight");
        if (parts.size() > 3 && !detail::parse_real(trim(parts[3]), spec.work_weight))
          throw kv.bad_value("regions." + key, *e, "a numeric work weight");
        c.regions.push_back(spec);
      }
    }
    c.validate();
    return c;
  }

  [[nodiscard]] std::vector<Region> region_list() const {
    std::vector<Region> out;
    for (const auto& r : regions) out.push_back(r.region);
    return out;
  }
};

namespace detail {

enum class Archetype : std::uint8_t { Commuter, ErrandRunner, LowMobility };

struct Visit {
  LocationPurpose purpose;
  RegionId region;
  Minutes trip_start;
  Minutes arrive;
  double trip_energy;
};

struct Stop {
  LocationPurpose purpose;
  RegionId region;
  Minutes dwell;
  double energy_in;  // energy of the trip that reaches this stop
};

inline double round_energy(double kwh) { return std::round(kwh * 1e6) / 1e6; }

class DriverPlanner {
 public:
  DriverPlanner(const SyntheticConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {
    std::vector<double> hw, ww;
    for (const auto& r : cfg.regions) {
      hw.push_back(r.home_weight);
      ww.push_back(r.work_weight);
    }
    const double u = rng_.uniform();
    if (u < cfg.commuter_share)
      archetype_ = Archetype::Commuter;
    else if (rng_.uniform() < cfg.low_mobility_share)
      archetype_ = Archetype::LowMobility;
    else
      archetype_ = Archetype::ErrandRunner;
    const auto& home = cfg.regions[rng_.weighted_index(hw)];
    home_region_ = home.region.id;
    work_region_ = cfg.regions[rng_.weighted_index(ww)].region.id;
    switch (home.region.urbanization) {
      case Urbanization::Urban: energy_scale_ = cfg.urban_energy_factor; break;
      case Urbanization::Periurban: energy_scale_ = cfg.periurban_energy_factor; break;
      case Urbanization::Rural: energy_scale_ = cfg.rural_energy_factor; break;
    }
    commute_energy_ = clamp_energy(rng_.lognormal_mean_cv(cfg.mean_commute_energy_kwh * energy_scale_,
                                                          cfg.trip_energy_cv));
  }

  [[nodiscard]] RegionId home_region() const { return home_region_; }

  std::vector<Visit> plan_week() {
    std::vector<Visit> visits;
    for (int day = 0; day < kDaysPerWeek; ++day) plan_day(day, visits);
    return visits;
  }

 private:
  double clamp_energy(double e) const { return round_energy(std::clamp(e, 0.05, cfg_.max_trip_energy_kwh)); }

  static Minutes trip_minutes(double energy) {
    return static_cast<Minutes>(std::clamp(std::lround(5.0 + 3.0 * energy), 5L, 150L));
  }

  Minutes draw_minutes(double mean, double sd, Minutes lo, Minutes hi) {
    return static_cast<Minutes>(std::clamp<long>(std::lround(rng_.normal(mean, sd)), lo, hi));
  }

  double errand_energy() {
    return clamp_energy(rng_.lognormal_mean_cv(cfg_.mean_trip_energy_kwh * energy_scale_, cfg_.trip_energy_cv));
  }

  double commute_leg() { return clamp_energy(commute_energy_ * (0.95 + 0.1 * rng_.uniform())); }

  LocationPurpose errand_purpose() {
    const std::array<double, 3> w{cfg_.leisure_weight, cfg_.shop_weight, cfg_.other_weight};
    constexpr std::array<LocationPurpose, 3> p{LocationPurpose::Leisure, LocationPurpose::Shop,
                                               LocationPurpose::Other};
    return p[rng_.weighted_index(w)];
  }

  Stop errand_stop() {
    const Minutes dwell = draw_minutes(cfg_.errand_dwell_mean_min, cfg_.errand_dwell_sd_min, 10, 360);
    return {errand_purpose(), home_region_, dwell, errand_energy()};
  }

  int errand_stop_count() {
    const double p = (cfg_.errand_stops_mean - 1.0) / 2.0;
    return 1 + static_cast<int>(rng_.bernoulli(p)) + static_cast<int>(rng_.bernoulli(p));
  }

  /// Appends a home-based tour if it returns home before the day ends;
  /// trailing stops are dropped until it fits. Returns the home arrival.
  std::optional<Minutes> add_tour(int day, Minutes depart, std::vector<Stop> stops, double energy_home,
                                  std::vector<Visit>& out) {
    const Minutes day_end = (day + 1) * kMinutesPerDay - 10;
    while (!stops.empty()) {
      Minutes t = depart;
      bool fits = true;
      std::vector<Visit> tour;
      for (const auto& s : stops) {
        const Minutes arrive = t + trip_minutes(s.energy_in);
        tour.push_back({s.purpose, s.region, t, arrive, s.energy_in});
        t = arrive + s.dwell;
      }
      const Minutes home_arrive = t + trip_minutes(energy_home);
      tour.push_back({LocationPurpose::Home, home_region_, t, home_arrive, energy_home});
      if (home_arrive > day_end) fits = false;
      if (fits) {
        out.insert(out.end(), tour.begin(), tour.end());
        return home_arrive;
      }
      stops.pop_back();
    }
    return std::nullopt;
  }

  void evening_leisure(int day, Minutes home_arrive, std::vector<Visit>& out) {
    if (!rng_.bernoulli(cfg_.evening_leisure_prob)) return;
    const Minutes gap = draw_minutes(cfg_.home_dwell_mean_min, cfg_.home_dwell_sd_min, 30, 600);
    auto stop = errand_stop();
    stop.purpose = LocationPurpose::Leisure;
    add_tour(day, home_arrive + gap, {stop}, errand_energy(), out);
  }

  void plan_day(int day, std::vector<Visit>& out) {
    const Minutes day_start = day * kMinutesPerDay;
    const bool weekday = day < 5;
    if (!weekday) {
      Minutes earliest = day_start + 420;
      for (int slot = 0; slot < 2; ++slot) {
        if (!rng_.bernoulli(cfg_.weekend_tour_prob)) continue;
        const Minutes dep =
            std::max(earliest, day_start + draw_minutes(slot == 0 ? 660 : 900, 120, 420, 1200));
        std::vector<Stop> stops;
        const int n = errand_stop_count() > 1 ? 2 : 1;
        for (int i = 0; i < n; ++i) stops.push_back(errand_stop());
        const auto back = add_tour(day, dep, stops, errand_energy(), out);
        if (back) earliest = *back + draw_minutes(cfg_.home_dwell_mean_min, cfg_.home_dwell_sd_min, 30, 600);
      }
      return;
    }
    switch (archetype_) {
      case Archetype::Commuter: {
        const Minutes dep = day_start + draw_minutes(cfg_.departure_mean_min, cfg_.departure_sd_min, 300, 600);
        const double to_work = commute_leg();
        const double from_work = commute_leg();
        Minutes dwell = draw_minutes(cfg_.work_dwell_mean_min, cfg_.work_dwell_sd_min, 240, 600);
        // The work tour must always fit: leave enough room for both commute legs.
        const Minutes latest_home = day_start + kMinutesPerDay - 60;
        dwell = std::min<Minutes>(dwell, latest_home - dep - trip_minutes(to_work) - trip_minutes(from_work));
        std::vector<Stop> stops{{LocationPurpose::Work, work_region_, dwell, to_work}};
        std::optional<Minutes> back;
        if (rng_.bernoulli(cfg_.after_work_errand_prob)) {
          auto errand = errand_stop();
          errand.energy_in = from_work;
          stops.push_back(errand);
          std::vector<Visit> trial;
          back = add_tour(day, dep, stops, errand_energy(), trial);
          if (back && trial.size() == 3) {
            out.insert(out.end(), trial.begin(), trial.end());
          } else {
            back.reset();
          }
          stops.pop_back();
        }
        if (!back) back = add_tour(day, dep, stops, from_work, out);
        if (back) evening_leisure(day, *back, out);
        break;
      }
      case Archetype::ErrandRunner: {
        const Minutes dep =
            day_start + draw_minutes(cfg_.errand_departure_mean_min, cfg_.errand_departure_sd_min, 360, 1200);
        std::vector<Stop> stops;
        const int n = errand_stop_count();
        for (int i = 0; i < n; ++i) stops.push_back(errand_stop());
        const auto back = add_tour(day, dep, stops, errand_energy(), out);
        if (back) evening_leisure(day, *back, out);
        break;
      }
      case Archetype::LowMobility: {
        if (!rng_.bernoulli(cfg_.low_mobility_trip_prob)) break;
        const Minutes dep =
            day_start + draw_minutes(cfg_.errand_departure_mean_min, cfg_.errand_departure_sd_min, 360, 1200);
        add_tour(day, dep, {errand_stop()}, errand_energy(), out);
        break;
      }
    }
  }

  const SyntheticConfig& cfg_;
  Rng& rng_;
  Archetype archetype_ = Archetype::ErrandRunner;
  RegionId home_region_ = 0;
  RegionId work_region_ = 0;
  double energy_scale_ = 1.0;
  double commute_energy_ = 0.0;
};

inline void append_visits(std::vector<ScheduleEvent>& events, const std::vector<Visit>& visits, Minutes shift) {
  for (const auto& v : visits) {
    events.back().end = v.trip_start + shift;
    events.push_back(ScheduleEvent::trip(v.trip_start + shift, v.arrive + shift, v.trip_energy, v.region));
    events.push_back(ScheduleEvent::parking(v.arrive + shift, 0, v.purpose, v.region));
  }
}

}  // namespace detail

/// One driver's schedule; a pure function of (config, seed, driver_id).
inline DriverSchedule generate_driver(const SyntheticConfig& cfg, std::uint64_t seed, DriverId driver_id) {
  Rng rng(stream_seed(seed, driver_id, StreamDomain::Generation));
  detail::DriverPlanner planner(cfg, rng);
  const auto week = planner.plan_week();

  DriverSchedule s;
  s.driver_id = driver_id;
  s.events.reserve(4 * week.size() + 2);
  s.events.push_back(ScheduleEvent::parking(-kPrefixMinutes, 0, LocationPurpose::Home, planner.home_region()));
  std::vector<detail::Visit> prefix;
  for (const auto& v : week)
    if (v.trip_start < kPrefixMinutes) prefix.push_back(v);
  detail::append_visits(s.events, prefix, -kPrefixMinutes);
  detail::append_visits(s.events, week, 0);
  s.events.back().end = kMinutesPerWeek;
  return s;
}

/// Drivers are numbered 1..N.
inline FleetScenario generate_synthetic_fleet(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  FleetScenario scenario;
  scenario.season_label = cfg.season;
  scenario.regions = cfg.region_list();
  scenario.global_seed = seed;
  scenario.drivers.reserve(static_cast<std::size_t>(cfg.drivers));
  for (long long i = 1; i <= cfg.drivers; ++i)
    scenario.drivers.push_back(generate_driver(cfg, seed, static_cast<DriverId>(i)));
  return scenario;
}

}  // namespace evflex
