#pragma once

// Plug-in decision model: a truncated-normal SOC threshold (the SOC at which
// drivers decide to charge) combined with forcing rules that keep the
// behaviour rational.

#include <cmath>
#include <concepts>
#include <optional>
#include <string_view>

#include <fmt/format.h>

#include "evflex/config.hpp"
#include "evflex/fleet_data.hpp"
#include "evflex/rng.hpp"
#include "evflex/types.hpp"

namespace evflex {

struct SimulationConfig {
  double mu = 0.6;
  double sigma = 0.2;
  double soc_floor = 0.15;
  Minutes min_parking_minutes = 60;
  double p80 = 0.5;
  ChargingRates rates;
  double energy_factor = 1.0;
  double closure_tolerance_kwh = 0.5;
  // Caps charge targets so the projected week-end SOC does not exceed the
  // week-start SOC (charging is unidirectional, so surplus cannot be undone).
  bool closure_target_cap = true;
  // Test hook: disables floor, reserve and closure forcing.
  bool forcing_rules = true;

  void validate() const {
    if (!(sigma > 0.0)) throw InputError(fmt::format("simulation.sigma must be > 0, got {}", sigma));
    if (!(p80 >= 0.0 && p80 <= 1.0)) throw InputError(fmt::format("simulation.p80 must lie in [0,1], got {}", p80));
    if (!(soc_floor >= 0.0 && soc_floor < 1.0))
      throw InputError(fmt::format("simulation.soc_floor must lie in [0,1), got {}", soc_floor));
    if (min_parking_minutes < 0) throw InputError("simulation.min_parking_minutes must be >= 0");
    if (!(energy_factor > 0.0)) throw InputError("simulation.energy_factor must be > 0");
    if (!(closure_tolerance_kwh >= 0.0)) throw InputError("simulation.closure_tolerance_kwh must be >= 0");
    for (double r : {rates.home, rates.work, rates.leisure, rates.shop, rates.other})
      if (!(r > 0.0)) throw InputError(fmt::format("charging rates must be > 0, got {}", r));
  }
};

/// Seasonal consumption multipliers selected by `--season`.
struct SeasonFactors {
  double winter = 1.16;
  double spring = 1.0;
  double summer = 1.0;
  double autumn = 1.05;

  [[nodiscard]] double factor(std::string_view season) const {
    if (season == "winter") return winter;
    if (season == "spring") return spring;
    if (season == "summer") return summer;
    if (season == "autumn") return autumn;
    throw InputError(fmt::format("unknown season '{}', expected winter|spring|summer|autumn", season));
  }
};

/// Reads [simulation] and [season]; the effective energy factor is
/// simulation.energy_factor times the factor of `season`.
inline SimulationConfig simulation_config_from(const KeyValueConfig& kv, std::string_view season) {
  SimulationConfig c;
  const std::string s = "simulation.";
  c.mu = kv.get_double(s + "mu", c.mu);
  c.sigma = kv.get_double(s + "sigma", c.sigma);
  c.soc_floor = kv.get_double(s + "soc_floor", c.soc_floor);
  c.min_parking_minutes = static_cast<Minutes>(kv.get_int(s + "min_parking_minutes", c.min_parking_minutes));
  c.p80 = kv.get_double(s + "p80", c.p80);
  c.rates.home = kv.get_double(s + "rate_home_kw", c.rates.home);
  c.rates.work = kv.get_double(s + "rate_work_kw", c.rates.work);
  c.rates.leisure = kv.get_double(s + "rate_leisure_kw", c.rates.leisure);
  c.rates.shop = kv.get_double(s + "rate_shop_kw", c.rates.shop);
  c.rates.other = kv.get_double(s + "rate_other_kw", c.rates.other);
  c.energy_factor = kv.get_double(s + "energy_factor", c.energy_factor);
  c.closure_tolerance_kwh = kv.get_double(s + "closure_tolerance_kwh", c.closure_tolerance_kwh);
  c.closure_target_cap = kv.get_bool(s + "closure_target_cap", c.closure_target_cap);
  SeasonFactors f;
  f.winter = kv.get_double("season.winter", f.winter);
  f.spring = kv.get_double("season.spring", f.spring);
  f.summer = kv.get_double("season.summer", f.summer);
  f.autumn = kv.get_double("season.autumn", f.autumn);
  c.energy_factor *= f.factor(season);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// truncated normal threshold

/// P(threshold > soc) for the normal(mu, sigma) truncated below at 0.
inline double survival_probability(double soc, double mu, double sigma) {
  if (soc <= 0.0) return 1.0;
  const double tail = 1.0 - normal_cdf((0.0 - mu) / sigma);
  return (1.0 - normal_cdf((soc - mu) / sigma)) / tail;
}

inline double survival_probability(double soc, const SimulationConfig& c) {
  return survival_probability(soc, c.mu, c.sigma);
}

/// Inverse-CDF sample of normal(mu, sigma) truncated to [0, inf). Values
/// above 1 are kept.
template <typename UniformSource>
double sample_plugin_threshold(UniformSource& rng, double mu, double sigma) {
  const double p0 = normal_cdf((0.0 - mu) / sigma);
  const double u = rng.uniform();
  return std::max(0.0, mu + sigma * normal_quantile(p0 + u * (1.0 - p0)));
}

/// Source of the two random quantities the simulator consumes. `Rng`-backed
/// draws are used in production; tests pin values through scripted sources.
template <typename D>
concept DrawSource = requires(D& d, const SimulationConfig& c) {
  { d.plugin_threshold(c) } -> std::convertible_to<double>;
  { d.uniform() } -> std::convertible_to<double>;
};

class RandomDraws {
 public:
  explicit RandomDraws(std::uint64_t seed) : rng_(seed) {}
  double plugin_threshold(const SimulationConfig& c) { return sample_plugin_threshold(rng_, c.mu, c.sigma); }
  double uniform() { return rng_.uniform(); }

 private:
  Rng rng_;
};

template <DrawSource D>
double sample_target_soc(D& draws, const SimulationConfig& c) {
  return draws.uniform() < c.p80 ? 0.80 : 1.00;
}

// ---------------------------------------------------------------------------
// decision

enum class Decision : std::uint8_t { Negative, Positive };

enum class DecisionReason : std::uint8_t { None, FloorBreach, TwoTripReserve, WeekClosureRisk, SampledThreshold };

inline constexpr std::string_view reason_name(DecisionReason r) {
  switch (r) {
    case DecisionReason::None: return "none";
    case DecisionReason::FloorBreach: return "floor_breach";
    case DecisionReason::TwoTripReserve: return "two_trip_reserve";
    case DecisionReason::WeekClosureRisk: return "week_closure_risk";
    case DecisionReason::SampledThreshold: return "sampled_threshold";
  }
  return "?";
}

inline std::optional<DecisionReason> reason_from_name(std::string_view s) {
  for (auto r : {DecisionReason::None, DecisionReason::FloorBreach, DecisionReason::TwoTripReserve,
                 DecisionReason::WeekClosureRisk, DecisionReason::SampledThreshold})
    if (reason_name(r) == s) return r;
  return std::nullopt;
}

struct VehicleState {
  double capacity_kwh = 0.0;
  double soc = 1.0;
  double week_start_soc = 1.0;

  [[nodiscard]] double energy_kwh() const { return soc * capacity_kwh; }
};

/// Week-end outlook at a parking event, assuming no charge is taken now.
struct ClosureOutlook {
  double trips_after_kwh = 0.0;     // remaining trip energy until week end
  double recharge_after_kwh = 0.0;  // most energy later parking events could add
};

/// What the decision needs to know about the rest of the schedule.
struct DecisionContext {
  // Trip energy the battery must cover before the next chance to charge: the
  // next two trips, or more when short stops follow without a parking event
  // long enough to charge.
  double reserve_trips_kwh = 0.0;
  std::optional<ClosureOutlook> closure;  // absent during initialization
};

struct DecisionOutcome {
  Decision decision = Decision::Negative;
  DecisionReason reason = DecisionReason::None;
  std::optional<double> sampled_threshold;
  bool reserve_short = false;  // rule (2) condition holds
  bool closure_risk = false;   // rule (3) condition holds
};

/// SOC needed on departure to cover the reserve trips and keep the floor.
inline double reserve_requirement_soc(const VehicleState& state, const DecisionContext& ctx,
                                      const SimulationConfig& c) {
  return std::min(1.0, (ctx.reserve_trips_kwh + c.soc_floor * state.capacity_kwh) / state.capacity_kwh);
}

/// Plug-in decision at arrival. Parking events not longer than the minimum
/// are Negative and consume no randomness; otherwise exactly one threshold is
/// drawn. The recorded reason is the first matching of: floor breach,
/// two-trip reserve, week closure risk, sampled threshold.
template <DrawSource D>
DecisionOutcome decide_charge(const VehicleState& state, const ScheduleEvent& parking, const DecisionContext& ctx,
                              D& draws, const SimulationConfig& c) {
  DecisionOutcome out;
  if (parking.duration() <= c.min_parking_minutes) return out;
  const double threshold = draws.plugin_threshold(c);
  out.sampled_threshold = threshold;

  const double energy = state.energy_kwh();
  const double floor_kwh = c.soc_floor * state.capacity_kwh;
  const bool floor_breach = c.forcing_rules && state.soc < c.soc_floor;
  out.reserve_short = c.forcing_rules && energy - ctx.reserve_trips_kwh < floor_kwh;
  if (c.forcing_rules && ctx.closure) {
    const double best_end = energy - ctx.closure->trips_after_kwh + ctx.closure->recharge_after_kwh;
    out.closure_risk = best_end < state.week_start_soc * state.capacity_kwh - 1e-9;
  }
  const bool sampled = state.soc < threshold;

  if (floor_breach)
    out.reason = DecisionReason::FloorBreach;
  else if (out.reserve_short)
    out.reason = DecisionReason::TwoTripReserve;
  else if (out.closure_risk)
    out.reason = DecisionReason::WeekClosureRisk;
  else if (sampled)
    out.reason = DecisionReason::SampledThreshold;
  out.decision = out.reason == DecisionReason::None ? Decision::Negative : Decision::Positive;
  return out;
}

}  // namespace evflex
