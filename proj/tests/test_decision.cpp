#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace evflex;
using evflex::testing::oracle_survival;
using evflex::testing::ScriptedDraws;
using evflex::testing::simpson_normal_cdf;

namespace {

ScheduleEvent home_parking(Minutes minutes) { return ScheduleEvent::parking(0, minutes, LocationPurpose::Home, 1); }

}  // namespace

TEST(SimpsonOracle, MatchesKnownValues) {
  EXPECT_NEAR(simpson_normal_cdf(0.0), 0.5, 1e-12);
  EXPECT_NEAR(simpson_normal_cdf(-3.0), 0.0013498980316301, 1e-12);
  EXPECT_NEAR(simpson_normal_cdf(-2.0), 0.0227501319481792, 1e-12);
}

TEST(Survival, AgreesWithOracle) {
  for (double s = 0.0; s <= 1.2; s += 0.05) EXPECT_NEAR(survival_probability(s, 0.6, 0.2), oracle_survival(s), 1e-10);
  EXPECT_EQ(survival_probability(0.0, 0.6, 0.2), 1.0);
  EXPECT_NEAR(survival_probability(0.6, 0.6, 0.2), 0.5007, 5e-5);
  EXPECT_NEAR(survival_probability(1.0, 0.6, 0.2), 0.0228, 5e-5);
}

TEST(ThresholdSampling, MomentsAndTail) {
  // Oracle mean of N(mu, sigma) truncated at 0: mu + sigma * pdf(a) / (1 - cdf(a)), a = -mu/sigma.
  const double a = -3.0;
  const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI);
  const double mean_oracle = 0.6 + 0.2 * pdf / (1.0 - simpson_normal_cdf(a));
  const double tail_oracle = oracle_survival(1.0);

  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0;
  int above_one = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_plugin_threshold(rng, 0.6, 0.2);
    ASSERT_GE(x, 0.0);
    sum += x;
    above_one += x > 1.0;
  }
  EXPECT_NEAR(sum / n, mean_oracle, 0.005);
  EXPECT_NEAR(static_cast<double>(above_one) / n, tail_oracle, 0.004);
}

TEST(TargetSoc, Probabilities) {
  SimulationConfig c;
  RandomDraws draws(77);
  c.p80 = 0.0;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_target_soc(draws, c), 1.0);
  c.p80 = 1.0;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_target_soc(draws, c), 0.8);
  c.p80 = 0.5;
  int low = 0;
  for (int i = 0; i < 10000; ++i) low += sample_target_soc(draws, c) == 0.8;
  EXPECT_NEAR(low / 10000.0, 0.5, 0.015);
}

TEST(DecideCharge, FloorBreach) {
  SimulationConfig c;
  ScriptedDraws d{{0.05}, {}};
  const auto out = decide_charge(VehicleState{70, 0.10, 1.0}, home_parking(300), {}, d, c);
  EXPECT_EQ(out.decision, Decision::Positive);
  EXPECT_EQ(out.reason, DecisionReason::FloorBreach);
}

TEST(DecideCharge, FullBatteryStaysNegative) {
  SimulationConfig c;
  ScriptedDraws d{{0.55}, {}};
  const auto out = decide_charge(VehicleState{70, 1.0, 1.0}, home_parking(300), {}, d, c);
  EXPECT_EQ(out.decision, Decision::Negative);
  EXPECT_EQ(out.reason, DecisionReason::None);
  EXPECT_EQ(out.sampled_threshold, 0.55);
}

TEST(DecideCharge, TwoTripReserve) {
  // 21 kWh - 14 kWh = 7 kWh < 10.5 kWh floor.
  SimulationConfig c;
  ScriptedDraws d{{0.1}, {}};
  DecisionContext ctx;
  ctx.reserve_trips_kwh = 14.0;
  const auto out = decide_charge(VehicleState{70, 0.30, 1.0}, home_parking(300), ctx, d, c);
  EXPECT_EQ(out.reason, DecisionReason::TwoTripReserve);
  EXPECT_TRUE(out.reserve_short);
}

TEST(DecideCharge, ClosureRisk) {
  // 56 kWh now, 30 kWh of trips ahead, at most 10 kWh of recharge: 36 < 0.9*70.
  SimulationConfig c;
  ScriptedDraws d{{0.1}, {}};
  DecisionContext ctx{5.0, ClosureOutlook{30.0, 10.0}};
  const auto out = decide_charge(VehicleState{70, 0.8, 0.9}, home_parking(300), ctx, d, c);
  EXPECT_EQ(out.reason, DecisionReason::WeekClosureRisk);
  ctx.closure->recharge_after_kwh = 100.0;
  ScriptedDraws d2{{0.1}, {}};
  EXPECT_EQ(decide_charge(VehicleState{70, 0.8, 0.9}, home_parking(300), ctx, d2, c).decision, Decision::Negative);
}

TEST(DecideCharge, ReasonOrderRecordsStrongestRule) {
  SimulationConfig c;
  ScriptedDraws d{{0.9}, {}};
  DecisionContext ctx{40.0, ClosureOutlook{100.0, 0.0}};
  const auto out = decide_charge(VehicleState{70, 0.10, 1.0}, home_parking(300), ctx, d, c);
  EXPECT_EQ(out.reason, DecisionReason::FloorBreach);
  EXPECT_TRUE(out.reserve_short);
  EXPECT_TRUE(out.closure_risk);
}

TEST(DecideCharge, ShortParkingConsumesNoRandomness) {
  SimulationConfig c;
  ScriptedDraws empty;
  const auto out = decide_charge(VehicleState{70, 0.05, 1.0}, home_parking(60), {}, empty, c);
  EXPECT_EQ(out.decision, Decision::Negative);
  EXPECT_FALSE(out.sampled_threshold.has_value());
}

TEST(DecideCharge, OneDrawEvenWhenForced) {
  SimulationConfig c;
  ScriptedDraws d{{0.3, 0.4}, {}};
  (void)decide_charge(VehicleState{70, 0.05, 1.0}, home_parking(61), {}, d, c);
  EXPECT_EQ(d.thresholds.size(), 1u);
}

TEST(DecideCharge, OutcomeReasonConsistency) {
  SimulationConfig c;
  Rng rng(5);
  RandomDraws draws(6);
  for (int i = 0; i < 5000; ++i) {
    const double cap = 70 + 10 * std::floor(rng.uniform() * 6);
    VehicleState s{cap, rng.uniform(), 0.5 + 0.5 * rng.uniform()};
    DecisionContext ctx{rng.uniform() * 40, ClosureOutlook{rng.uniform() * 100, rng.uniform() * 100}};
    const auto out = decide_charge(s, home_parking(61 + static_cast<Minutes>(rng.uniform() * 600)), ctx, draws, c);
    EXPECT_EQ(out.decision == Decision::Positive, out.reason != DecisionReason::None);
  }
}

TEST(DecideCharge, ForcingRulesHook) {
  SimulationConfig c;
  c.forcing_rules = false;
  ScriptedDraws d{{0.05}, {}};
  DecisionContext ctx{60.0, ClosureOutlook{100.0, 0.0}};
  EXPECT_EQ(decide_charge(VehicleState{70, 0.10, 1.0}, home_parking(300), ctx, d, c).decision, Decision::Negative);
}

// ---------------------------------------------------------------------------
// charging process

namespace {

std::optional<ChargingEvent> charge(double cap, double soc, LocationPurpose p, Minutes minutes, double target_draw,
                                    DecisionReason reason = DecisionReason::SampledThreshold) {
  SimulationConfig c;
  c.p80 = 0.5;
  VehicleState state{cap, soc, 1.0};
  DecisionOutcome outcome{Decision::Positive, reason, 0.9, false, false};
  ScriptedDraws d{{}, {target_draw}};
  return execute_charging(state, ScheduleEvent::parking(0, minutes, p, 1), outcome, DecisionContext{}, d, c);
}

}  // namespace

TEST(ExecuteCharging, FullTargetWithinParking) {
  const auto ev = charge(70, 0.5, LocationPurpose::Home, 360, 0.9);  // draw 0.9 >= p80 -> target 1.0
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->charge_end, 300);
  EXPECT_DOUBLE_EQ(ev->energy_kwh, 35.0);
  EXPECT_EQ(ev->end_soc, 1.0);
  EXPECT_EQ(ev->target_soc, 1.0);
}

TEST(ExecuteCharging, ParkingEndsFirst) {
  const auto ev = charge(70, 0.5, LocationPurpose::Home, 120, 0.9);
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->charge_end, 120);
  EXPECT_DOUBLE_EQ(ev->energy_kwh, 14.0);
  EXPECT_DOUBLE_EQ(ev->end_soc, 0.7);
}

TEST(ExecuteCharging, PartialLastMinuteExact) {
  // Exact oracle: 21 kWh at 11 kW is 1260/11 = 114.545... minutes; ceil = 115
  // in integer arithmetic; the last minute delivers 21 - 11*114/60 = 6/60 kWh.
  const long long num = 21 * 60, den = 11;
  const long long minutes = (num + den - 1) / den;
  const double last_minute_kwh = (21.0 * 60 - 11.0 * (minutes - 1)) / 60.0;
  const auto ev = charge(70, 0.5, LocationPurpose::Work, 480, 0.1);  // draw 0.1 < p80 -> 0.8
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->target_soc, 0.8);
  EXPECT_EQ(ev->duration(), minutes);
  EXPECT_EQ(ev->duration(), 115);
  EXPECT_NEAR(ev->energy_kwh, 21.0, 1e-12);
  EXPECT_EQ(ev->end_soc, 0.8);
  const auto segs = charging_segments(*ev);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_NEAR(segs[1].kw / 60.0, last_minute_kwh, 1e-12);
  EXPECT_NEAR(last_minute_kwh, 0.1, 1e-12);
}

TEST(ExecuteCharging, TargetRaisedAboveArrival) {
  const auto ev = charge(70, 0.85, LocationPurpose::Home, 600, 0.1);  // 0.8 <= 0.85 -> 1.0
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->target_soc, 1.0);
}

TEST(ExecuteCharging, ClosureRiskForcesFull) {
  SimulationConfig c;
  c.closure_target_cap = false;
  VehicleState state{70, 0.5, 1.0};
  DecisionOutcome outcome{Decision::Positive, DecisionReason::WeekClosureRisk, 0.1, false, true};
  ScriptedDraws d{{}, {0.1}};
  DecisionContext ctx{0.0, ClosureOutlook{50.0, 0.0}};
  const auto ev = execute_charging(state, home_parking(900), outcome, ctx, d, c);
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->target_soc, 1.0);
}

TEST(ExecuteCharging, ReserveRaisesTarget) {
  SimulationConfig c;
  VehicleState state{70, 0.2, 1.0};
  DecisionOutcome outcome{Decision::Positive, DecisionReason::TwoTripReserve, 0.1, true, false};
  ScriptedDraws d{{}, {0.1}};
  DecisionContext ctx{55.0, std::nullopt};  // needs (55 + 10.5)/70 = 0.936 > 0.8
  const auto ev = execute_charging(state, home_parking(900), outcome, ctx, d, c);
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->target_soc, 1.0);
}

TEST(ExecuteCharging, NegativeYieldsNothing) {
  SimulationConfig c;
  VehicleState state{70, 0.5, 1.0};
  ScriptedDraws d;
  EXPECT_FALSE(execute_charging(state, home_parking(300), DecisionOutcome{}, {}, d, c));
  EXPECT_EQ(state.soc, 0.5);
}
