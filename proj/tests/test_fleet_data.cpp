#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace evflex;
using evflex::testing::ScheduleBuilder;

namespace {

DriverSchedule commuter_day(DriverId id) {
  return ScheduleBuilder(id, 0, LocationPurpose::Home)
      .trip(450, 20, 5.0)
      .at(LocationPurpose::Work)
      .trip(980, 20, 5.0)
      .done();
}

}  // namespace

TEST(RateForPurpose, DefaultRates) {
  EXPECT_EQ(rate_for_purpose(LocationPurpose::Home), 7.0);
  EXPECT_EQ(rate_for_purpose(LocationPurpose::Work), 11.0);
  EXPECT_EQ(rate_for_purpose(LocationPurpose::Leisure), 22.0);
  EXPECT_EQ(rate_for_purpose(LocationPurpose::Shop), 22.0);
  EXPECT_EQ(rate_for_purpose(LocationPurpose::Other), 22.0);
}

TEST(RateForPurpose, Overridable) {
  ChargingRates r;
  r.home = 3.7;
  EXPECT_EQ(rate_for_purpose(LocationPurpose::Home, r), 3.7);
}

TEST(ValidateSchedule, WellFormedWeekIsOk) {
  EXPECT_TRUE(validate_schedule(commuter_day(1)).ok());
}

TEST(ValidateSchedule, TwoConsecutiveTrips) {
  auto s = commuter_day(1);
  s.events[2] = ScheduleEvent::trip(s.events[2].start, s.events[2].end, 1.0, 1);
  const auto v = validate_schedule(s);
  ASSERT_TRUE(v.has(ViolationKind::AlternationBroken));
  bool found = false;
  for (const auto& x : v.violations) found |= x.message == "alternation broken at index 2";
  EXPECT_TRUE(found);
}

TEST(ValidateSchedule, GapIsNonContiguous) {
  auto s = commuter_day(1);
  s.events[2].start += 5;
  const auto v = validate_schedule(s);
  ASSERT_TRUE(v.has(ViolationKind::NonContiguous));
  EXPECT_EQ(v.violations.front().index, 2u);
  EXPECT_NE(v.violations.front().message.find("non-contiguous"), std::string::npos);
}

TEST(ValidateSchedule, BoundsAndEnergy) {
  auto s = commuter_day(1);
  s.events.back().end = 9000;
  EXPECT_TRUE(validate_schedule(s).has(ViolationKind::BadSpan));
  s = commuter_day(1);
  s.events[1].energy_kwh = -1.0;
  EXPECT_TRUE(validate_schedule(s).has(ViolationKind::InvalidEnergy));
  s = commuter_day(1);
  s.events.pop_back();
  EXPECT_TRUE(validate_schedule(s).has(ViolationKind::EndsWithTrip));
  EXPECT_TRUE(validate_schedule(DriverSchedule{}).has(ViolationKind::Empty));
}

TEST(ValidateSchedule, DurationsSumToSpan) {
  const auto fleet = generate_synthetic_fleet([] {
    SyntheticConfig c;
    c.drivers = 200;
    return c;
  }(), 7);
  for (const auto& s : fleet.drivers) {
    ASSERT_TRUE(validate_schedule(s).ok()) << s.driver_id;
    Minutes total = 0;
    for (const auto& e : s.events) total += e.duration();
    EXPECT_EQ(total, s.events.back().end - s.events.front().start);
    EXPECT_EQ(total, kMinutesPerWeek + kPrefixMinutes);
  }
}

TEST(LoadFleet, RoundTripTwoDrivers) {
  std::vector<DriverSchedule> drivers{commuter_day(3), commuter_day(1)};
  std::ostringstream out;
  write_schedules(out, drivers);
  std::istringstream in(out.str());
  const auto fleet = load_fleet(in);
  ASSERT_EQ(fleet.drivers.size(), 2u);
  EXPECT_EQ(fleet.drivers[0], commuter_day(1));
  EXPECT_EQ(fleet.drivers[1], commuter_day(3));
}

TEST(LoadFleet, OverlapNamesDriver) {
  std::istringstream in(
      "driver_id,event_kind,start_min,end_min,purpose,energy_kwh,region_id\n"
      "7,P,0,500,H,,1\n"
      "7,T,450,470,,2.0,1\n"
      "7,P,470,10080,W,,1\n");
  try {
    (void)load_fleet(in);
    FAIL() << "expected a chronology error";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("driver 7"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("event index 1"), std::string::npos);
  }
}

TEST(LoadFleet, ListsEveryFailingDriver) {
  std::istringstream in(
      "driver_id,event_kind,start_min,end_min,purpose,energy_kwh,region_id\n"
      "4,P,0,100,H,,1\n"
      "9,P,0,100,H,,1\n");
  try {
    (void)load_fleet(in);
    FAIL();
  } catch (const InvariantError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("driver 4"), std::string::npos);
    EXPECT_NE(msg.find("driver 9"), std::string::npos);
  }
}

TEST(LoadFleet, EmptyFileIsEmptyScenario) {
  std::istringstream in("");
  EXPECT_TRUE(load_fleet(in).drivers.empty());
  std::istringstream header_only(std::string(kScheduleHeader) + "\n");
  EXPECT_TRUE(load_fleet(header_only).drivers.empty());
}

TEST(LoadFleet, SchemaErrors) {
  auto load = [](const std::string& body) {
    std::istringstream in(std::string(kScheduleHeader) + "\n" + body);
    return load_fleet(in);
  };
  EXPECT_THROW(load("1,X,0,10080,H,,1\n"), InputError);
  EXPECT_THROW(load("1,P,0,10080,Q,,1\n"), InputError);
  EXPECT_THROW(load("1,P,0,10080,H,3.0,1\n"), InputError);
  EXPECT_THROW(load("1,P,zero,10080,H,,1\n"), InputError);
  EXPECT_THROW(load("1,P,0\n"), InputError);
  std::istringstream bad_header("id,kind\n");
  EXPECT_THROW(load_fleet(bad_header), InputError);
}

TEST(LoadFleet, UnknownRegion) {
  std::istringstream in(std::string(kScheduleHeader) + "\n1,P,0,10080,H,,5\n");
  EXPECT_THROW(load_fleet(in, {}, {{1, "a", Urbanization::Urban}}), InputError);
}

TEST(LoadFleet, SemicolonDelimiter) {
  std::istringstream in(
      "driver_id;event_kind;start_min;end_min;purpose;energy_kwh;region_id\n"
      "2;P;0;10080;H;;1\n");
  const auto fleet = load_fleet(in, ScheduleFormat{';'});
  ASSERT_EQ(fleet.drivers.size(), 1u);
  EXPECT_EQ(fleet.drivers[0].events[0].end, kMinutesPerWeek);
}

TEST(Regions, RoundTrip) {
  const std::vector<Region> regions{{1, "centre", Urbanization::Urban}, {4, "hills", Urbanization::Rural}};
  std::ostringstream out;
  write_regions(out, regions);
  std::istringstream in(out.str());
  EXPECT_EQ(load_regions(in), regions);
  std::istringstream bad(std::string(kRegionHeader) + "\n1,x,metropolis\n");
  EXPECT_THROW(load_regions(bad), InputError);
}

TEST(WeekView, ClipsSpanningParking) {
  auto s = ScheduleBuilder(1, -kPrefixMinutes, LocationPurpose::Home).trip(-100, 20, 1.0).trip(500, 20, 1.0).done();
  const auto parkings = week_parkings(s);
  ASSERT_EQ(parkings.size(), 2u);
  EXPECT_EQ(parkings[0].start, 0);
  EXPECT_EQ(parkings[0].end, 500);
}

TEST(TimeHelpers, DayAndHourWrap) {
  EXPECT_EQ(day_of(0), 0);
  EXPECT_EQ(day_of(1439), 0);
  EXPECT_EQ(day_of(1440), 1);
  EXPECT_EQ(day_of(10079), 6);
  EXPECT_EQ(day_of(10080), 0);
  EXPECT_EQ(day_of(-1), 6);
  EXPECT_EQ(hour_of(-1), 167);
  EXPECT_EQ(hour_of(61), 1);
}

// ---------------------------------------------------------------------------
// synthetic generator

TEST(Synthetic, AllCommutersWorkEveryWeekday) {
  SyntheticConfig c;
  c.drivers = 100;
  c.commuter_share = 1.0;
  const auto fleet = generate_synthetic_fleet(c, 11);
  for (const auto& s : fleet.drivers) {
    std::array<bool, 5> worked{};
    for (const auto& e : week_events(s))
      if (e.is_parking() && e.purpose == LocationPurpose::Work && day_of(e.start) < 5) worked[day_of(e.start)] = true;
    for (int d = 0; d < 5; ++d) EXPECT_TRUE(worked[d]) << "driver " << s.driver_id << " day " << d;
  }
}

TEST(Synthetic, NoCommutersNoWork) {
  SyntheticConfig c;
  c.drivers = 1000;
  c.commuter_share = 0.0;
  const auto fleet = generate_synthetic_fleet(c, 42);
  std::size_t work = 0;
  for (const auto& s : fleet.drivers)
    for (const auto& e : s.events) work += e.is_parking() && e.purpose == LocationPurpose::Work;
  EXPECT_EQ(work, 0u);
}

TEST(Synthetic, DeterministicAndByteIdentical) {
  SyntheticConfig c;
  c.drivers = 300;
  const auto a = generate_synthetic_fleet(c, 5);
  const auto b = generate_synthetic_fleet(c, 5);
  EXPECT_EQ(a.drivers, b.drivers);
  std::ostringstream sa, sb;
  write_schedules(sa, a.drivers);
  write_schedules(sb, b.drivers);
  EXPECT_EQ(sa.str(), sb.str());
  const auto other = generate_synthetic_fleet(c, 6);
  EXPECT_NE(a.drivers, other.drivers);
}

TEST(Synthetic, DriverIndependentOfFleetSize) {
  SyntheticConfig small, large;
  small.drivers = 10;
  large.drivers = 500;
  const auto a = generate_synthetic_fleet(small, 3);
  const auto b = generate_synthetic_fleet(large, 3);
  for (std::size_t i = 0; i < a.drivers.size(); ++i) EXPECT_EQ(a.drivers[i], b.drivers[i]);
}

TEST(Synthetic, EnergiesFiniteAndWeekendsQuieter) {
  SyntheticConfig c;
  c.drivers = 2000;
  const auto fleet = generate_synthetic_fleet(c, 9);
  std::array<std::size_t, 7> trips{};
  for (const auto& s : fleet.drivers) {
    EXPECT_TRUE(s.has_prefix());
    for (const auto& e : s.events) {
      if (!e.is_trip()) continue;
      EXPECT_TRUE(std::isfinite(e.energy_kwh));
      EXPECT_GE(e.energy_kwh, 0.0);
      if (e.start >= 0) ++trips[day_of(e.start)];
    }
  }
  const double weekday = (trips[0] + trips[1] + trips[2] + trips[3] + trips[4]) / 5.0;
  const double weekend = (trips[5] + trips[6]) / 2.0;
  EXPECT_LT(weekend, weekday);
}

TEST(Synthetic, PrefixReplaysFirstTwoDays) {
  SyntheticConfig c;
  c.drivers = 20;
  for (const auto& s : generate_synthetic_fleet(c, 1).drivers) {
    std::vector<ScheduleEvent> prefix_trips, early_trips;
    for (const auto& e : s.events) {
      if (!e.is_trip()) continue;
      if (e.start < 0)
        prefix_trips.push_back(e);
      else if (e.start < kPrefixMinutes)
        early_trips.push_back(e);
    }
    ASSERT_EQ(prefix_trips.size(), early_trips.size());
    for (std::size_t i = 0; i < prefix_trips.size(); ++i) {
      EXPECT_EQ(prefix_trips[i].start + kPrefixMinutes, early_trips[i].start);
      EXPECT_EQ(prefix_trips[i].energy_kwh, early_trips[i].energy_kwh);
    }
  }
}

TEST(Synthetic, InvalidConfig) {
  SyntheticConfig c;
  c.commuter_share = 1.5;
  EXPECT_THROW(generate_synthetic_fleet(c, 1), InputError);
  c = {};
  c.drivers = -1;
  EXPECT_THROW(generate_synthetic_fleet(c, 1), InputError);
}

TEST(Synthetic, ConfigSections) {
  const auto kv = KeyValueConfig::parse_string(
      "[synthetic]\ndrivers = 12\ncommuter_share = 0.25\n[regions]\n7 = town, periurban, 2.0, 1.0\n");
  const auto c = SyntheticConfig::from_config(kv);
  EXPECT_EQ(c.drivers, 12);
  EXPECT_EQ(c.commuter_share, 0.25);
  ASSERT_EQ(c.regions.size(), 1u);
  EXPECT_EQ(c.regions[0].region.id, 7u);
  EXPECT_EQ(c.regions[0].region.urbanization, Urbanization::Periurban);
  EXPECT_EQ(c.regions[0].home_weight, 2.0);
}

TEST(Config, UnknownKeyIsNamed) {
  const auto kv = KeyValueConfig::parse_string("[simulation]\nmu = 0.6\nsgima = 0.2\n");
  try {
    (void)run_config_from(kv);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("simulation.sgima"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
}

TEST(Config, DuplicatesSectionsAndValues) {
  EXPECT_THROW(KeyValueConfig::parse_string("[a]\nx = 1\nx = 2\n"), InputError);
  EXPECT_THROW(run_config_from(KeyValueConfig::parse_string("[nope]\nx = 1\n")), InputError);
  EXPECT_THROW(run_config_from(KeyValueConfig::parse_string("[simulation]\nmu = abc\n")), InputError);
  EXPECT_THROW(run_config_from(KeyValueConfig::parse_string("[simulation]\np80 = 1.5\n")), InputError);
  EXPECT_THROW(run_config_from(KeyValueConfig::parse_string("[simulation]\nsigma = 0\n")), InputError);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"default.ini", "rural_home.ini", "urban_work.ini"}) {
    const auto rc = load_run_config(evflex::testing::source_dir() + "/configs/" + name);
    EXPECT_EQ(rc.config_hash.size(), 64u) << name;
  }
  const auto defaults = load_run_config("");
  const auto shipped = load_run_config(evflex::testing::source_dir() + "/configs/default.ini");
  EXPECT_EQ(defaults.simulation.mu, shipped.simulation.mu);
  EXPECT_DOUBLE_EQ(defaults.simulation.energy_factor, shipped.simulation.energy_factor);
  EXPECT_EQ(defaults.synthetic.drivers, shipped.synthetic.drivers);
}

TEST(Config, SeasonFactor) {
  const auto winter = load_run_config("", {std::nullopt, std::string("winter")});
  const auto summer = load_run_config("", {std::nullopt, std::string("summer")});
  EXPECT_DOUBLE_EQ(winter.simulation.energy_factor, 1.16);
  EXPECT_DOUBLE_EQ(summer.simulation.energy_factor, 1.0);
  EXPECT_THROW(load_run_config("", {std::nullopt, std::string("monsoon")}), InputError);
}
