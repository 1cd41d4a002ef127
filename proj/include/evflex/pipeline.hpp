#pragma once

// Batch stages: generate -> simulate -> flex -> report. Stages exchange
// files; each output directory gets one manifest.json with digests.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <sys/resource.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "evflex/aggregate.hpp"
#include "evflex/battery.hpp"
#include "evflex/charge_sim.hpp"
#include "evflex/digest.hpp"
#include "evflex/fleet_data.hpp"
#include "evflex/flex.hpp"
#include "evflex/io.hpp"
#include "evflex/run_config.hpp"
#include "evflex/synthetic.hpp"

namespace evflex {

namespace fs = std::filesystem;

inline const std::map<std::string, std::string>& module_versions() {
  static const std::map<std::string, std::string> v{
      {"fleet-data", "1.0.0"}, {"battery-assign", "1.0.0"}, {"charge-sim", "1.0.0"},
      {"flex-quant", "1.0.0"}, {"aggregate-report", "1.0.0"}, {"cli", "1.0.0"},
  };
  return v;
}

// ---------------------------------------------------------------------------
// files

/// Files written by one stage. Unless `commit` is called, every registered
/// file is removed again on destruction, so a failed stage leaves no partial
/// outputs behind.
class StageOutputs {
 public:
  explicit StageOutputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
  }
  StageOutputs(const StageOutputs&) = delete;
  StageOutputs& operator=(const StageOutputs&) = delete;

  ~StageOutputs() {
    if (committed_) return;
    for (const auto& p : files_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  fs::path add(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }

  [[nodiscard]] const fs::path& dir() const { return dir_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

/// Writes through `fn(std::ostream&)` and checks the stream afterwards.
template <typename F>
void write_file(const fs::path& path, F&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  fn(out);
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

// ---------------------------------------------------------------------------
// manifest

struct RunManifest {
  std::string stage;
  std::string config_hash;
  std::uint64_t global_seed = 0;
  std::string scenario_id;
  std::string season;
  std::map<std::string, std::string> inputs;   // file name -> sha256
  std::map<std::string, std::string> outputs;  // file name -> sha256
  std::map<std::string, long long> counts;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["config_hash"] = config_hash;
    j["global_seed"] = global_seed;
    j["scenario_id"] = scenario_id;
    j["season"] = season;
    j["module_versions"] = module_versions();
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["counts"] = counts;
    return j;
  }
};

inline RunManifest manifest_for(std::string stage, const RunConfig& rc) {
  RunManifest m;
  m.stage = std::move(stage);
  m.config_hash = rc.config_hash;
  m.global_seed = rc.seed;
  m.scenario_id = rc.scenario_id;
  m.season = rc.season;
  return m;
}

inline void add_digest(std::map<std::string, std::string>& into, const fs::path& file) {
  into[file.filename().string()] = file_sha256(file);
}

/// Wall-clock time lives next to the manifest, not in it, so that manifests
/// of identical runs are byte-identical.
inline void finish_stage(StageOutputs& files, RunManifest& m, double seconds) {
  const auto timing = files.add("timing.txt");
  write_file(timing, [&](std::ostream& o) { o << fmt::format("wall_seconds = {:.3f}\n", seconds); });
  const auto manifest = files.add("manifest.json");
  write_file(manifest, [&](std::ostream& o) { o << m.to_json().dump(2) << '\n'; });
  files.commit();
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// parallel helpers

/// Runs fn(worker, begin, end) over fixed chunks of [0, n) on `threads`
/// workers; `worker` is in [0, threads). Chunk boundaries do not depend on
/// the thread count.
template <typename F>
void parallel_chunks(std::size_t n, unsigned threads, std::size_t chunk, F&& fn) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, chunks))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](unsigned worker) {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        fn(worker, c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = chunks;
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// per-driver helpers shared by the file stages and the streaming run

struct FlexCounts {
  std::size_t eligible = 0;
  std::size_t parking_too_short = 0;
  std::size_t parking_too_long = 0;
  std::size_t charging_fills_parking = 0;

  void add(FlexExclusion x) {
    switch (x) {
      case FlexExclusion::None: ++eligible; break;
      case FlexExclusion::ParkingTooShort: ++parking_too_short; break;
      case FlexExclusion::ParkingTooLong: ++parking_too_long; break;
      case FlexExclusion::ChargingFillsParking: ++charging_fills_parking; break;
    }
  }
  FlexCounts& operator+=(const FlexCounts& o) {
    eligible += o.eligible;
    parking_too_short += o.parking_too_short;
    parking_too_long += o.parking_too_long;
    charging_fills_parking += o.charging_fills_parking;
    return *this;
  }
  [[nodiscard]] std::size_t excluded() const { return parking_too_short + parking_too_long + charging_fills_parking; }
};

/// Envelopes of one driver's charging events. Each event must sit in the
/// week parking event its parking_index names.
inline void quantify_driver(const std::vector<ScheduleEvent>& parkings, std::span<const ChargingEvent> events,
                            const FlexConfig& fc, std::vector<FlexibilityEnvelope>& out, FlexCounts& counts) {
  for (const auto& ev : events) {
    if (ev.parking_index < 0 || static_cast<std::size_t>(ev.parking_index) >= parkings.size())
      throw InvariantError(fmt::format("driver {} has no parking event {}", ev.driver_id, ev.parking_index));
    const auto& p = parkings[static_cast<std::size_t>(ev.parking_index)];
    if (p.start != ev.charge_start || p.end != ev.parking_end || p.region != ev.region)
      throw InvariantError(fmt::format("charging event of driver {} does not match parking event {}", ev.driver_id,
                                       ev.parking_index));
    const auto x = flex_exclusion(p.duration(), ev.duration(), fc);
    counts.add(x);
    if (x == FlexExclusion::None) out.push_back(quantify_event(ev, p, fc));
  }
}

inline double driver_demand_kwh(const DriverSchedule& s, const SimulationConfig& c) {
  return max_daily_energy(s) * c.energy_factor;
}

// ---------------------------------------------------------------------------
// stages

inline const char* kScheduleFile = "schedule.csv";
inline const char* kRegionFile = "regions.csv";

/// generate: synthetic schedule and region files.
inline RunManifest cmd_generate(const RunConfig& rc, const fs::path& out_dir) {
  Stopwatch clock;
  StageOutputs files(out_dir);
  const auto scenario = generate_synthetic_fleet(rc.synthetic, rc.seed);
  const auto schedule = files.add(kScheduleFile);
  write_file(schedule, [&](std::ostream& o) { write_schedules(o, scenario.drivers); });
  const auto regions = files.add(kRegionFile);
  write_file(regions, [&](std::ostream& o) { write_regions(o, scenario.regions); });

  auto m = manifest_for("generate", rc);
  add_digest(m.outputs, schedule);
  add_digest(m.outputs, regions);
  m.counts["drivers"] = static_cast<long long>(scenario.drivers.size());
  m.counts["regions"] = static_cast<long long>(scenario.regions.size());
  finish_stage(files, m, clock.seconds());
  return m;
}

inline std::vector<Region> read_region_file(const fs::path& path) {
  auto in = open_input(path);
  return load_regions(in);
}

inline FleetScenario read_scenario(const fs::path& scenario_dir) {
  auto regions = read_region_file(scenario_dir / kRegionFile);
  auto in = open_input(scenario_dir / kScheduleFile);
  return load_fleet(in, {}, std::move(regions));
}

struct SimulationDiagnostics {
  long long drivers = 0;
  long long infeasible_drivers = 0;
  long long trip_exceeds_capacity = 0;
  long long stranded = 0;
  long long floor_unreachable = 0;
  long long null_charges = 0;
  long long closure_shortfalls = 0;
  long long closure_surpluses = 0;
  long long floor_violations = 0;
  long long promoted = 0;
  long long capped = 0;
  long long events = 0;

  void write(std::ostream& o) const {
    o << fmt::format("drivers = {}\n", drivers);
    o << fmt::format("infeasible_drivers = {}\n", infeasible_drivers);
    o << fmt::format("infeasible.trip_exceeds_capacity = {}\n", trip_exceeds_capacity);
    o << fmt::format("infeasible.stranded = {}\n", stranded);
    o << fmt::format("infeasible.floor_unreachable = {}\n", floor_unreachable);
    o << fmt::format("null_charges = {}\n", null_charges);
    o << fmt::format("closure_shortfalls = {}\n", closure_shortfalls);
    o << fmt::format("closure_surpluses = {}\n", closure_surpluses);
    o << fmt::format("floor_violations = {}\n", floor_violations);
    o << fmt::format("battery_promoted = {}\n", promoted);
    o << fmt::format("battery_capped = {}\n", capped);
    o << fmt::format("charging_events = {}\n", events);
  }
};

struct SimulationOutput {
  std::vector<DriverResult> results;  // sorted by driver id
  BatteryAssignmentResult batteries;
  SimulationDiagnostics diagnostics;
};

/// Simulates every driver of `scenario`; output order is by driver id for any
/// thread count.
inline SimulationOutput simulate_fleet(const FleetScenario& scenario, const RunConfig& rc, unsigned threads,
                                       bool record_trajectory = false) {
  SimulationOutput out;
  std::vector<DriverDemand> demand;
  demand.reserve(scenario.drivers.size());
  for (const auto& s : scenario.drivers) demand.push_back({s.driver_id, driver_demand_kwh(s, rc.simulation)});
  if (!demand.empty()) out.batteries = assign_batteries(std::move(demand), rc.battery);

  out.results.resize(scenario.drivers.size());
  const SimulationOptions opts{record_trajectory};
  parallel_chunks(scenario.drivers.size(), threads, 256, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = scenario.drivers[i];
      out.results[i] = simulate_driver(s, out.batteries.capacity(s.driver_id), rc.seed, rc.simulation, opts);
    }
  });

  auto& d = out.diagnostics;
  d.drivers = static_cast<long long>(out.results.size());
  d.promoted = static_cast<long long>(out.batteries.promoted);
  d.capped = static_cast<long long>(out.batteries.capped);
  for (const auto& r : out.results) {
    d.null_charges += static_cast<long long>(r.null_charges);
    d.floor_violations += static_cast<long long>(r.floor_violations);
    if (r.excluded()) {
      ++d.infeasible_drivers;
      if (r.flag == DriverFlag::TripExceedsCapacity) ++d.trip_exceeds_capacity;
      if (r.flag == DriverFlag::Stranded) ++d.stranded;
      if (r.flag == DriverFlag::FloorUnreachable) ++d.floor_unreachable;
      continue;
    }
    d.events += static_cast<long long>(r.events.size());
    if (r.closure.status == ClosureStatus::Shortfall) ++d.closure_shortfalls;
    if (r.closure.status == ClosureStatus::Surplus) ++d.closure_surpluses;
  }
  return out;
}

inline void write_driver_table(std::ostream& o, const SimulationOutput& sim) {
  o << "driver_id,capacity_kwh,quantile_capacity_kwh,promoted,capped,flag,week_start_soc,week_end_soc,"
       "closure_status,closure_mismatch_kwh,floor_violations,null_charges,trip_kwh,charged_kwh\n";
  for (const auto& r : sim.results) {
    const auto& b = sim.batteries.by_driver.at(r.driver_id);
    o << fmt::format("{},{:.1f},{:.1f},{},{},{},{:.6f},{:.6f},{},{:.6f},{},{},{:.6f},{:.6f}\n", r.driver_id,
                     b.capacity_kwh, b.quantile_capacity_kwh, b.promoted ? 1 : 0, b.capped ? 1 : 0,
                     driver_flag_name(r.flag), r.closure.week_start_soc, r.closure.week_end_soc,
                     closure_status_name(r.closure.status), r.closure.mismatch_kwh, r.floor_violations,
                     r.null_charges, r.week_trip_kwh, r.week_charged_kwh);
  }
}

/// simulate: charging events of all feasible drivers, a per-driver table and
/// diagnostics counts. Flagged drivers are listed but emit no events.
inline RunManifest cmd_simulate(const fs::path& scenario_dir, const RunConfig& rc, const fs::path& out_dir,
                                unsigned threads) {
  Stopwatch clock;
  const auto scenario = read_scenario(scenario_dir);
  StageOutputs files(out_dir);
  const auto sim = simulate_fleet(scenario, rc, threads);

  const auto events = files.add("events.csv");
  write_file(events, [&](std::ostream& o) {
    o << kEventHeader << '\n';
    for (const auto& r : sim.results)
      if (!r.excluded())
        for (const auto& e : r.events) write_event_row(o, e);
  });
  const auto drivers = files.add("drivers.csv");
  write_file(drivers, [&](std::ostream& o) { write_driver_table(o, sim); });
  const auto diagnostics = files.add("diagnostics.txt");
  write_file(diagnostics, [&](std::ostream& o) { sim.diagnostics.write(o); });

  auto m = manifest_for("simulate", rc);
  add_digest(m.inputs, scenario_dir / kScheduleFile);
  add_digest(m.inputs, scenario_dir / kRegionFile);
  for (const auto& f : {events, drivers, diagnostics}) add_digest(m.outputs, f);
  m.counts["drivers"] = sim.diagnostics.drivers;
  m.counts["charging_events"] = sim.diagnostics.events;
  m.counts["infeasible_drivers"] = sim.diagnostics.infeasible_drivers;
  m.counts["null_charges"] = sim.diagnostics.null_charges;
  m.counts["closure_shortfalls"] = sim.diagnostics.closure_shortfalls;
  finish_stage(files, m, clock.seconds());
  return m;
}

inline std::vector<ChargingEvent> read_event_file(const fs::path& path) {
  auto in = open_input(path);
  return read_events(in);
}

inline std::vector<FlexibilityEnvelope> read_envelope_file(const fs::path& path) {
  auto in = open_input(path);
  return read_envelopes(in);
}

/// Events grouped by driver, in driver id then parking index order.
inline void sort_events(std::vector<ChargingEvent>& events) {
  std::stable_sort(events.begin(), events.end(), [](const ChargingEvent& a, const ChargingEvent& b) {
    return a.driver_id != b.driver_id ? a.driver_id < b.driver_id : a.parking_index < b.parking_index;
  });
}

/// Envelopes and exclusion counts for events read against their scenario.
inline std::vector<FlexibilityEnvelope> quantify_events(std::vector<ChargingEvent> events,
                                                        const FleetScenario& scenario, const FlexConfig& fc,
                                                        FlexCounts& counts) {
  sort_events(events);
  std::vector<FlexibilityEnvelope> out;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    while (j < events.size() && events[j].driver_id == events[i].driver_id) ++j;
    const auto it = std::lower_bound(scenario.drivers.begin(), scenario.drivers.end(), events[i].driver_id,
                                     [](const DriverSchedule& s, DriverId id) { return s.driver_id < id; });
    if (it == scenario.drivers.end() || it->driver_id != events[i].driver_id)
      throw InvariantError(fmt::format("charging events reference unknown driver {}", events[i].driver_id));
    quantify_driver(week_parkings(*it), std::span(events).subspan(i, j - i), fc, out, counts);
    i = j;
  }
  return out;
}

/// flex: one envelope per eligible charging event.
inline RunManifest cmd_flex(const fs::path& events_path, const fs::path& scenario_dir, const RunConfig& rc,
                            const fs::path& out_dir) {
  Stopwatch clock;
  const auto scenario = read_scenario(scenario_dir);
  auto events = read_event_file(events_path);
  FlexCounts counts;
  const auto envelopes = quantify_events(std::move(events), scenario, rc.flex, counts);

  StageOutputs files(out_dir);
  const auto env_file = files.add("envelopes.csv");
  write_file(env_file, [&](std::ostream& o) { write_envelopes(o, envelopes); });
  const auto diag = files.add("flex_diagnostics.txt");
  write_file(diag, [&](std::ostream& o) {
    o << fmt::format("eligible = {}\n", counts.eligible);
    o << fmt::format("excluded.parking_too_short = {}\n", counts.parking_too_short);
    o << fmt::format("excluded.parking_too_long = {}\n", counts.parking_too_long);
    o << fmt::format("excluded.charging_fills_parking = {}\n", counts.charging_fills_parking);
  });

  auto m = manifest_for("flex", rc);
  add_digest(m.inputs, events_path);
  add_digest(m.inputs, scenario_dir / kScheduleFile);
  add_digest(m.inputs, scenario_dir / kRegionFile);
  add_digest(m.outputs, env_file);
  add_digest(m.outputs, diag);
  m.counts["envelopes"] = static_cast<long long>(envelopes.size());
  m.counts["excluded"] = static_cast<long long>(counts.excluded());
  finish_stage(files, m, clock.seconds());
  return m;
}

/// report: regional and national profiles, daily tables and summary.
inline RunManifest cmd_report(const fs::path& events_path, const fs::path& envelopes_path,
                              const fs::path& regions_path, const RunConfig& rc, const fs::path& out_dir) {
  Stopwatch clock;
  const auto regions = read_region_file(regions_path);
  auto events = read_event_file(events_path);
  const auto envelopes = read_envelope_file(envelopes_path);
  const auto agg = aggregate(std::move(events), envelopes, regions);
  const auto summary = summarize(agg.regional, agg.national, regions);

  StageOutputs files(out_dir);
  std::vector<fs::path> written;
  auto emit = [&](const char* name, auto&& fn) {
    written.push_back(files.add(name));
    write_file(written.back(), fn);
  };
  emit("profiles.csv", [&](std::ostream& o) { write_profiles(o, agg.regional); });
  emit("daily.csv", [&](std::ostream& o) { write_daily(o, agg.regional); });
  emit("national.csv", [&](std::ostream& o) { write_national(o, agg.national); });
  emit("national_daily.csv", [&](std::ostream& o) { write_national_daily(o, agg.national); });
  emit("boxplot.csv", [&](std::ostream& o) { write_boxplot(o, summary); });
  emit("summary.txt", [&](std::ostream& o) { write_summary(o, summary); });

  auto m = manifest_for("report", rc);
  add_digest(m.inputs, events_path);
  add_digest(m.inputs, envelopes_path);
  add_digest(m.inputs, regions_path);
  for (const auto& f : written) add_digest(m.outputs, f);
  m.counts["regions"] = static_cast<long long>(agg.regional.size());
  finish_stage(files, m, clock.seconds());
  return m;
}

/// run-all: the four stages into <out>/{generate,simulate,flex,report}, plus
/// a top-level manifest listing each stage manifest's digest.
inline RunManifest run_all(const RunConfig& rc, const fs::path& out_dir, unsigned threads) {
  Stopwatch clock;
  const auto gen_dir = out_dir / "generate";
  const auto sim_dir = out_dir / "simulate";
  const auto flex_dir = out_dir / "flex";
  const auto report_dir = out_dir / "report";
  cmd_generate(rc, gen_dir);
  cmd_simulate(gen_dir, rc, sim_dir, threads);
  cmd_flex(sim_dir / "events.csv", gen_dir, rc, flex_dir);
  cmd_report(sim_dir / "events.csv", flex_dir / "envelopes.csv", gen_dir / kRegionFile, rc, report_dir);

  StageOutputs files(out_dir);
  auto m = manifest_for("run-all", rc);
  for (const auto& d : {gen_dir, sim_dir, flex_dir, report_dir})
    m.outputs[d.filename().string() + "/manifest.json"] = file_sha256(d / "manifest.json");
  finish_stage(files, m, clock.seconds());
  return m;
}

// ---------------------------------------------------------------------------
// streaming run for large fleets

struct StreamingResult {
  AggregateResult profiles;
  std::size_t drivers = 0;
  std::size_t infeasible = 0;
  std::size_t charging_events = 0;
  std::size_t envelopes = 0;
  FlexCounts flex;
  double seconds = 0.0;
  double peak_rss_mb = 0.0;
};

inline double peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / 1024.0;  // ru_maxrss is in KiB on Linux
}

/// Generate, simulate, quantify and aggregate without keeping schedules or
/// events: a first pass collects each driver's demand for the battery
/// assignment, the second regenerates each schedule and streams it through.
inline StreamingResult run_streaming(const RunConfig& rc, unsigned threads) {
  Stopwatch clock;
  const auto& syn = rc.synthetic;
  syn.validate();
  const auto n = static_cast<std::size_t>(syn.drivers);
  const auto regions = syn.region_list();
  constexpr std::size_t kChunk = 2048;

  std::vector<DriverDemand> demand(n);
  parallel_chunks(n, threads, kChunk, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto id = static_cast<DriverId>(i + 1);
      demand[i] = {id, driver_demand_kwh(generate_driver(syn, rc.seed, id), rc.simulation)};
    }
  });
  std::vector<double> capacity(n);
  {
    const auto batteries = assign_batteries(std::move(demand), rc.battery);
    for (std::size_t i = 0; i < n; ++i) capacity[i] = batteries.capacity(static_cast<DriverId>(i + 1));
  }

  struct Partial {
    ProfileAccumulator acc;
    std::size_t infeasible = 0, events = 0, envelopes = 0;
    FlexCounts flex;
  };
  const unsigned workers = std::max(1u, threads);
  std::vector<Partial> partial;
  partial.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) partial.push_back({ProfileAccumulator(regions), 0, 0, 0, {}});
  // One accumulator per worker; sums are exact integers, so the merge order
  // does not matter.
  parallel_chunks(n, threads, kChunk, [&](unsigned worker, std::size_t begin, std::size_t end) {
    auto& p = partial[worker];
    std::vector<FlexibilityEnvelope> envs;
    for (std::size_t i = begin; i < end; ++i) {
      const auto id = static_cast<DriverId>(i + 1);
      const auto schedule = generate_driver(syn, rc.seed, id);
      const auto r = simulate_driver(schedule, capacity[i], rc.seed, rc.simulation, SimulationOptions{false});
      if (r.excluded()) {
        ++p.infeasible;
        continue;
      }
      envs.clear();
      quantify_driver(week_parkings(schedule), r.events, rc.flex, envs, p.flex);
      p.events += r.events.size();
      p.envelopes += envs.size();
      p.acc.add_driver(r.events, envs);
    }
  });

  StreamingResult out;
  out.drivers = n;
  ProfileAccumulator total(regions);
  for (const auto& p : partial) {
    total.merge(p.acc);
    out.infeasible += p.infeasible;
    out.charging_events += p.events;
    out.envelopes += p.envelopes;
    out.flex += p.flex;
  }
  out.profiles = {total.regional(), total.national()};
  out.seconds = clock.seconds();
  out.peak_rss_mb = peak_rss_mb();
  return out;
}

}  // namespace evflex
