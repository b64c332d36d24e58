#include "app.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>

#include "bohmctx/errors.hpp"
#include "bohmctx/parallel.hpp"
#include "bohmctx/scenarios.hpp"
#include "config_io.hpp"
#include "output.hpp"

namespace bohmctx::cli {

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "bohmctx_out";
  std::string format = "csv";
  bool plot = false;
  std::optional<std::size_t> trajectories;
  std::string scenario;  // born-check and defaults
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

template <class Config>
Config load(const Flags& flags, const std::string& expected) {
  Config config;
  if (!flags.config.empty()) {
    auto source = ConfigSource::from_file(flags.config);
    const std::string named = source.take_scenario();
    if (!named.empty() && named != expected) {
      throw InvalidInput(flags.config + ": config is for scenario '" + named + "', not '" + expected + "'");
    }
    source.apply(config);
  }
  if (flags.seed) config.common.seed = *flags.seed;
  if (flags.trajectories) config.common.ensemble = *flags.trajectories;
  return config;
}

OutputOptions output_options(const Flags& flags) {
  OutputOptions o;
  o.directory = flags.out;
  o.format = flags.format == "json" ? TableFormat::json : TableFormat::csv;
  o.plot = flags.plot;
  return o;
}

void print_summary(const ScenarioResult& r) {
  for (const auto& e : r.ensembles) {
    std::cout << r.scenario << " [" << e.label << "] n=" << e.runs.size() << " resolved=" << e.resolved << "  "
              << e.plus_name << ": " << e.plus_frequency << "  " << e.minus_name << ": " << e.minus_frequency;
    for (const auto& [name, a] : e.accuracies) std::cout << "  acc(" << name << ")=" << a.fraction;
    if (e.verdict) std::cout << "  verdict=" << to_string(e.verdict->label);
    std::cout << '\n';
    for (const auto& [name, passed] : e.audit_passed) {
      if (!passed) std::cout << "  audit failed: " << name << " = " << e.audits.at(name) << '\n';
    }
    if (e.degraded) std::cout << "  degraded: more than 10% of runs unresolved\n";
  }
  for (const auto& row : r.regime_table) {
    std::cout << "  regime";
    for (const auto& [k, v] : row.parameters) std::cout << ' ' << k << '=' << v;
    std::cout << " -> " << to_string(row.verdict.label) << '\n';
  }
}

template <class Config, class Run>
int run_scenario(const std::string& subcommand, const Flags& flags, const std::string& scenario, Run run) {
  const Config config = load<Config>(flags, scenario);
  ensure_directory(flags.out);
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.started_utc = utc_now();
  const ScenarioResult result = run(config);
  manifest.subcommand = subcommand;
  manifest.scenario = scenario;
  manifest.seed = config.common.seed;
  manifest.config = flatten(config);
  manifest.threads = config.common.threads ? config.common.threads : thread_count();
  manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto files = write_outputs(result, manifest, output_options(flags));
  print_summary(result);
  std::cout << "wrote " << files.size() << " files to " << flags.out << '\n';
  return 0;
}

// Equivariance diagnostics only: KS of endpoints against |psi(T)|^2 and the
// crossing audit, per ensemble.
template <class Config, class Run>
int born_check(const Flags& flags, const std::string& scenario, ConfigSource source, Run run) {
  Config config;
  config.common.ensemble = 2000;
  source.apply(config);
  if (flags.seed) config.common.seed = *flags.seed;
  if (flags.trajectories) config.common.ensemble = *flags.trajectories;
  ensure_directory(flags.out);
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.started_utc = utc_now();
  const ScenarioResult result = run(config);

  nlohmann::ordered_json summary;
  summary["scenario"] = scenario;
  summary["ensemble_size"] = config.common.ensemble;
  summary["checks"] = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& e : result.ensembles) {
    nlohmann::ordered_json check{{"ensemble", e.label}};
    for (const char* name : {"born_ks", "crossing_violations"}) {
      if (!e.audits.contains(name)) continue;
      const bool passed = e.audit_passed.at(name);
      check[name] = {{"value", e.audits.at(name)}, {"passed", passed}};
      all = all && passed;
      std::cout << scenario << " [" << e.label << "] " << name << " = " << e.audits.at(name)
                << (passed ? "  PASS" : "  FAIL") << '\n';
    }
    summary["checks"].push_back(std::move(check));
  }
  summary["passed"] = all;
  manifest.subcommand = "born-check";
  manifest.scenario = scenario;
  manifest.seed = config.common.seed;
  manifest.config = flatten(config);
  manifest.threads = config.common.threads ? config.common.threads : thread_count();
  manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary_only(summary, manifest, output_options(flags));
  return 0;
}

int born_check_dispatch(const Flags& flags) {
  ConfigSource source = flags.config.empty() ? ConfigSource::from_text("") : ConfigSource::from_file(flags.config);
  std::string scenario = source.take_scenario();
  if (!flags.scenario.empty()) {
    if (!scenario.empty() && scenario != flags.scenario) {
      throw InvalidInput("--scenario " + flags.scenario + " disagrees with the config's scenario " + scenario);
    }
    scenario = flags.scenario;
  }
  if (scenario.empty()) scenario = scenarios::BornCheckConfig{}.scenario;
  if (scenario == "beam_splitter") {
    return born_check<BeamSplitterConfig>(flags, scenario, source,
                                          [](const auto& c) { return scenarios::run_beam_splitter(c); });
  }
  if (scenario == "stern_gerlach") {
    return born_check<SternGerlachConfig>(flags, scenario, source,
                                          [](const auto& c) { return scenarios::run_stern_gerlach(c); });
  }
  if (scenario == "optical_sg") {
    return born_check<OpticalSgConfig>(flags, scenario, source,
                                       [](const auto& c) { return scenarios::run_optical_sg(c); });
  }
  if (scenario == "ancilla_chain") {
    return born_check<AncillaConfig>(flags, scenario, source, [](const auto& c) {
      return ScenarioResult{"ancilla_chain", {scenarios::run_ancilla_ensemble(c)}, {}};
    });
  }
  throw InvalidInput("unknown scenario '" + scenario + "'");
}

int print_defaults(const std::string& scenario) {
  if (scenario == "beam_splitter") {
    std::cout << serialize(BeamSplitterConfig{});
  } else if (scenario == "stern_gerlach") {
    std::cout << serialize(SternGerlachConfig{});
  } else if (scenario == "optical_sg") {
    std::cout << serialize(OpticalSgConfig{});
  } else if (scenario == "ancilla_chain") {
    std::cout << serialize(AncillaConfig{});
  } else {
    throw InvalidInput("unknown scenario '" + scenario + "'");
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Bohmian trajectory simulations of measurement scenarios", "bohmctx"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::string> scenario_names{"beam_splitter", "stern_gerlach", "optical_sg", "ancilla_chain"};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "config file (flat key: value, see `defaults`)");
    sub->add_option("--seed", flags.seed, "override the RNG seed");
    sub->add_option("--out", flags.out, "output directory")->capture_default_str();
    sub->add_option("--format", flags.format, "table format for runs/trajectories/overlaps")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_flag("--plot", flags.plot, "write SVG overlap and accuracy plots");
    sub->add_option("--trajectories", flags.trajectories, "override the ensemble size n")
        ->check(CLI::PositiveNumber);
  };
  auto* bs = app.add_subcommand("beam-splitter", "two counter-moving packets and two detectors");
  auto* sg = app.add_subcommand("stern-gerlach", "spin-1/2 packet in a linear field gradient");
  auto* osg = app.add_subcommand("optical-sg", "pointer model with co-located system branches, N sweep");
  auto* anc = app.add_subcommand("ancilla", "system, ancilla and apparatus chain with regime map");
  auto* born = app.add_subcommand("born-check", "equivariance diagnostics only (default n = 2000)");
  for (auto* sub : {bs, sg, osg, anc, born}) add_common(sub);
  born->add_option("--scenario", flags.scenario, "scenario to check (or the config's scenario key)")
      ->check(CLI::IsMember(scenario_names));
  auto* defaults = app.add_subcommand("defaults", "print every config key with its default");
  defaults->add_option("scenario", flags.scenario, "scenario name")
      ->required()
      ->check(CLI::IsMember(scenario_names));

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*bs) {
      return run_scenario<BeamSplitterConfig>("beam-splitter", flags, "beam_splitter",
                                              [](const auto& c) { return scenarios::run_beam_splitter(c); });
    }
    if (*sg) {
      return run_scenario<SternGerlachConfig>("stern-gerlach", flags, "stern_gerlach",
                                              [](const auto& c) { return scenarios::run_stern_gerlach(c); });
    }
    if (*osg) {
      return run_scenario<OpticalSgConfig>("optical-sg", flags, "optical_sg",
                                           [](const auto& c) { return scenarios::run_optical_sg(c); });
    }
    if (*anc) {
      return run_scenario<AncillaConfig>("ancilla", flags, "ancilla_chain",
                                         [](const auto& c) { return scenarios::run_ancilla_chain(c); });
    }
    if (*born) return born_check_dispatch(flags);
    if (*defaults) return print_defaults(flags.scenario);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bohmctx::cli
