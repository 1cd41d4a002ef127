// Streaming benchmark: generate, simulate, quantify and aggregate N drivers
// nationally without materializing the fleet.
//
//   evflex_bench --drivers 1000000 --threads 8 [--config run.ini] [--baseline-seconds 95]
//
// With --baseline-seconds the run fails (exit 4) when it is more than 20 %
// slower than the recorded baseline.

#include <cstdio>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "evflex/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"evflex streaming benchmark"};
  long long drivers = 1'000'000;
  unsigned threads = 0;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> baseline;
  app.add_option("--drivers", drivers, "fleet size")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads (default: all cores)");
  app.add_option("--config", config, "key-value run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global seed");
  app.add_option("--baseline-seconds", baseline, "regression baseline");
  CLI11_PARSE(app, argc, argv);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  try {
    auto rc = evflex::load_run_config(config, {seed, std::nullopt});
    rc.synthetic.drivers = drivers;
    const auto r = evflex::run_streaming(rc, threads);
    double energy = 0.0;
    for (int d = 0; d < evflex::kDaysPerWeek; ++d) energy += r.profiles.national.charged_kwh(d);
    fmt::print("drivers = {}\n", r.drivers);
    fmt::print("threads = {}\n", threads);
    fmt::print("infeasible_drivers = {}\n", r.infeasible);
    fmt::print("charging_events = {}\n", r.charging_events);
    fmt::print("envelopes = {}\n", r.envelopes);
    fmt::print("charged_mwh = {:.3f}\n", energy / 1000.0);
    fmt::print("wall_seconds = {:.2f}\n", r.seconds);
    fmt::print("peak_rss_mb = {:.1f}\n", r.peak_rss_mb);
    if (baseline && r.seconds > 1.2 * *baseline) {
      fmt::print("REGRESSION: {:.2f} s exceeds baseline {:.2f} s by more than 20%\n", r.seconds, *baseline);
      return 4;
    }
    return 0;
  } catch (const evflex::InputError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
