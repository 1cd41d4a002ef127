// evflex: batch front end for the fleet charging and flexibility pipeline.
//
//   evflex generate --config run.ini --out scen/
//   evflex simulate --scenario scen/ --config run.ini --threads 8 --out sim/
//   evflex flex     --events sim/events.csv --scenario scen/ --out flex/
//   evflex report   --events sim/events.csv --envelopes flex/envelopes.csv --regions scen/regions.csv --out rep/
//   evflex run-all  --config run.ini --out run/
//
// Exit codes: 0 success, 1 input error, 2 invariant violation, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "evflex/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> season;
  unsigned threads = 0;
  std::string out;
  std::string scenario;
  std::string events;
  std::string envelopes;
  std::string regions;
};

unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void print_manifest(const evflex::RunManifest& m) {
  for (const auto& [name, digest] : m.outputs) fmt::print("{}  {}\n", digest, name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV fleet charging simulation and flexibility quantification"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", o.config, "key-value run configuration")->check(CLI::ExistingFile);
    if (config_required) c->required();
    cmd->add_option("--seed", o.seed, "global seed (overrides run.seed)");
    cmd->add_option("--season", o.season, "winter|spring|summer|autumn");
    cmd->add_option("--out", o.out, "output directory")->required();
  };

  auto* gen = app.add_subcommand("generate", "write a synthetic scenario");
  common(gen, false);

  auto* sim = app.add_subcommand("simulate", "simulate charging decisions for a scenario");
  common(sim, false);
  sim->add_option("--scenario", o.scenario, "scenario directory")->required()->check(CLI::ExistingDirectory);
  sim->add_option("--threads", o.threads, "worker threads (default: all cores)");

  auto* flex = app.add_subcommand("flex", "quantify flexibility of charging events");
  common(flex, false);
  flex->add_option("--events", o.events, "events.csv")->required()->check(CLI::ExistingFile);
  flex->add_option("--scenario", o.scenario, "scenario directory")->required()->check(CLI::ExistingDirectory);

  auto* report = app.add_subcommand("report", "aggregate profiles and summary statistics");
  common(report, false);
  report->add_option("--events", o.events, "events.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--envelopes", o.envelopes, "envelopes.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--regions", o.regions, "regions.csv")->required()->check(CLI::ExistingFile);

  auto* all = app.add_subcommand("run-all", "generate, simulate, flex and report in one go");
  common(all, false);
  all->add_option("--threads", o.threads, "worker threads (default: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const auto rc = evflex::load_run_config(o.config, {o.seed, o.season});
    evflex::RunManifest m;
    if (gen->parsed())
      m = evflex::cmd_generate(rc, o.out);
    else if (sim->parsed())
      m = evflex::cmd_simulate(o.scenario, rc, o.out, thread_count(o.threads));
    else if (flex->parsed())
      m = evflex::cmd_flex(o.events, o.scenario, rc, o.out);
    else if (report->parsed())
      m = evflex::cmd_report(o.events, o.envelopes, o.regions, rc, o.out);
    else
      m = evflex::run_all(rc, o.out, thread_count(o.threads));
    print_manifest(m);
    return 0;
  } catch (const evflex::InputError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return 1;
  } catch (const evflex::InvariantError& e) {
    fmt::print(stderr, "invariant violation: {}\n", e.what());
    return 2;
  } catch (const evflex::IoError& e) {
    fmt::print(stderr, "i/o error: {}\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "i/o error: {}\n", e.what());
    return 3;
  }
}
