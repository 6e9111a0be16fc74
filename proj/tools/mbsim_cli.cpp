// mbsim: command-line front end for the gNB local multicast breakout simulator.
//
//   mbsim run      --config F [--seed N] [--out DIR]
//   mbsim compare  --config F [--seed N] [--out DIR] [--measurement event|analytic]
//   mbsim sweep    --config F --sizes 10:150:10 [--seeds K] [--jobs J] [--out DIR]
//   mbsim validate --config F
//
// Exit codes: 0 ok, 1 configuration error, 2 internal invariant violation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mbsim/mbsim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInternal = 2;

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

std::vector<std::uint32_t> parse_sizes(const std::string& spec) {
  std::vector<std::uint32_t> out;
  auto num = [&](const std::string& s) -> std::uint32_t {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used);
    if (used != s.size()) throw mbsim::ConfigError("--sizes: bad number '" + s + "'");
    return static_cast<std::uint32_t>(v);
  };
  try {
    if (spec.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream ss(spec);
      for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
      if (parts.size() != 3) throw mbsim::ConfigError("--sizes: expected FIRST:LAST:STEP");
      const auto first = num(parts[0]), last = num(parts[1]), step = num(parts[2]);
      if (step == 0) throw mbsim::ConfigError("--sizes: step must be positive");
      for (std::uint32_t n = first; n <= last; n += step) out.push_back(n);
    } else {
      std::stringstream ss(spec);
      for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
    }
  } catch (const std::logic_error&) {
    throw mbsim::ConfigError("--sizes: cannot parse '" + spec + "'");
  }
  if (out.empty()) throw mbsim::ConfigError("--sizes: empty list");
  for (auto n : out) {
    if (n < 1 || n > mbsim::kMaxReceivers) {
      throw mbsim::ConfigError("--sizes: " + std::to_string(n) + " outside [1, " +
                               std::to_string(mbsim::kMaxReceivers) + "]");
    }
  }
  return out;
}

/// Loads and validates; prints every diagnostic. Throws ConfigError on any.
mbsim::ScenarioConfig load_checked(const CommonOpts& o) {
  auto loaded = mbsim::load_config(o.config);
  if (o.seed) loaded.config.seed = *o.seed;
  const auto diags = mbsim::validate(loaded.config, &loaded.where);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d.format(o.config) << '\n';
    throw mbsim::ConfigError(std::to_string(diags.size()) + " configuration error(s)");
  }
  return loaded.config;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

int cmd_run(const CommonOpts& o) {
  const auto cfg = load_checked(o);
  const auto report = mbsim::run_scenario(cfg);
  {
    auto f = open_out(o.out, "packets.csv");
    mbsim::write_packets_csv(f, report.runs, cfg.deadline);
  }
  if (!report.runs.empty()) {
    auto f = open_out(o.out, "ues.csv");
    mbsim::write_ues_csv(f, report.runs.front().ues);
  }
  std::ostringstream summary;
  mbsim::write_summary(summary, report);
  auto f = open_out(o.out, "summary.txt");
  f << summary.str();
  std::cout << summary.str();
  return kExitOk;
}

int cmd_compare(const CommonOpts& o, const std::string& measurement) {
  auto cfg = load_checked(o);
  cfg.mode = mbsim::ScenarioMode::Paired;
  if (measurement == "analytic") cfg.measurement = mbsim::Measurement::Analytic;
  else if (measurement == "event") cfg.measurement = mbsim::Measurement::Event;
  const auto result = mbsim::paired_compare(cfg);
  auto f = open_out(o.out, "compare.csv");
  mbsim::write_compare_csv(f, result);
  std::cout << "measurement " << mbsim::to_string(cfg.measurement) << ", matched pairs "
            << result.matched << ", mean gap " << mbsim::detail::fmt_double(result.mean_gap_us / 1000.0, 3)
            << " ms\n";
  return kExitOk;
}

int cmd_sweep(const CommonOpts& o, const std::string& sizes_spec, std::uint32_t seeds, unsigned jobs) {
  const auto cfg = load_checked(o);
  const auto sizes = parse_sizes(sizes_spec);
  for (auto n : sizes) {
    const auto diags = mbsim::validate(mbsim::sized_config(cfg, n));
    if (!diags.empty()) {
      for (const auto& d : diags) std::cerr << "size " << n << ": " << d.format() << '\n';
      throw mbsim::ConfigError("sweep configuration invalid");
    }
  }
  const auto points = mbsim::sweep(cfg, sizes, seeds, jobs);
  std::ostringstream csv;
  mbsim::write_sweep_csv(csv, points);
  auto f = open_out(o.out, "sweep.csv");
  f << csv.str();
  std::cout << csv.str();
  return kExitOk;
}

int cmd_validate(const CommonOpts& o) {
  const auto loaded = mbsim::load_config(o.config);
  const auto diags = mbsim::validate(loaded.config, &loaded.where);
  for (const auto& d : diags) std::cout << d.format(o.config) << '\n';
  if (diags.empty()) {
    std::cout << o.config << ": ok\n";
    return kExitOk;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gNB-local multicast breakout simulator"};
  app.require_subcommand(1);

  CommonOpts run_o, cmp_o, sweep_o, val_o;
  auto add_common = [](CLI::App* sub, CommonOpts& o, bool outputs) {
    sub->add_option("--config,-c", o.config, "Scenario YAML file")->required()->check(CLI::ExistingFile);
    if (outputs) {
      sub->add_option("--seed", o.seed, "Override the scenario seed");
      sub->add_option("--out,-o", o.out, "Output directory")->capture_default_str();
    }
  };

  auto* run = app.add_subcommand("run", "Run a scenario; writes packets.csv, ues.csv, summary.txt");
  add_common(run, run_o, true);

  auto* cmp = app.add_subcommand("compare", "Paired core-anchored vs local-breakout run; writes compare.csv");
  add_common(cmp, cmp_o, true);
  std::string measurement;
  cmp->add_option("--measurement", measurement, "Override measurement mode")
      ->check(CLI::IsMember({"event", "analytic"}));

  auto* swp = app.add_subcommand("sweep", "Group-size sweep; writes sweep.csv");
  add_common(swp, sweep_o, true);
  std::string sizes = "10:150:10";
  std::uint32_t seeds = 3;
  unsigned jobs = 0;
  swp->add_option("--sizes", sizes, "FIRST:LAST:STEP or comma list")->capture_default_str();
  swp->add_option("--seeds", seeds, "Seeds per size")->capture_default_str()->check(CLI::PositiveNumber);
  swp->add_option("--jobs,-j", jobs, "Worker threads (0: hardware concurrency)");

  auto* val = app.add_subcommand("validate", "Check a scenario file");
  add_common(val, val_o, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o);
    if (*cmp) return cmd_compare(cmp_o, measurement);
    if (*swp) return cmd_sweep(sweep_o, sizes, seeds, jobs);
    if (*val) return cmd_validate(val_o);
  } catch (const mbsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mbsim::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mbsim::InvariantViolation& e) {
    std::cerr << "internal invariant violated: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
