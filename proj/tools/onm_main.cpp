#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "onm/analysis.hpp"
#include "onm/bench.hpp"
#include "onm/io.hpp"
#include "onm/verify.hpp"
#include "onm/version.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailure = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeFailure = 3;
constexpr int kAssumptionViolated = 4;

struct RunArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::size_t threads = 0;
};

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 7;
};

struct BoundsArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  double h = 0.0, L = 0.0, ell = 0.0, beta = 0.0;
  double vbar = 0.0, Vbar = 0.0, e0 = 0.0;
  std::optional<double> eT, VT;
  bool explicit_mode = false;
};

int cmd_run(const RunArgs& args) {
  onm::bench::ExperimentConfig config = onm::io::load_config(args.config_path);
  if (args.seed) config.master_seed = *args.seed;
  if (args.replications) config.replications = *args.replications;
  config.validate();

  const auto report = onm::bench::run_experiment(config, args.threads);
  if (report.completed == 0) {
    std::string first = "no details";
    for (const auto& rep : report.replications) {
      if (rep.partial) {
        first = "replication " + std::to_string(rep.replication) + " round " +
                std::to_string(rep.failed_round) + ": " + rep.failure;
        break;
      }
    }
    std::cerr << "error: every replication failed (" << first << ")\n";
    return kRuntimeFailure;
  }

  std::filesystem::create_directories(args.out_dir);
  onm::io::RunManifest manifest;
  manifest.config_path = args.config_path;
  manifest.resolved_config = onm::io::config_to_json(config);
  manifest.master_seed = config.master_seed;
  manifest.tool_version = onm::kToolVersion;
  manifest.timestamp = onm::io::current_utc_timestamp();
  manifest.output_dir = args.out_dir;
  manifest.threads = args.threads;

  onm::io::write_regret_csv(report, args.out_dir + "/regret.csv");
  onm::io::write_trajectory_csv(report, args.out_dir + "/trajectories.csv");
  onm::io::write_summary_json(report, manifest, args.out_dir + "/summary.json");
  onm::io::write_manifest_json(manifest, args.out_dir + "/manifest.json");

  std::cout << "completed " << report.completed << "/" << config.replications
            << " replications (" << report.partial << " partial)\n"
            << "wrote " << args.out_dir
            << "/{regret.csv, trajectories.csv, summary.json, manifest.json}\n";
  return kOk;
}

int cmd_verify(const VerifyArgs& args) {
  std::vector<onm::verify::SuiteReport> reports;
  if (args.suite == "all") {
    reports = onm::verify::run_all(args.seed);
  } else if (args.suite == "lemma1") {
    reports.push_back(onm::verify::run_lemma1(args.seed));
  } else if (args.suite == "lemma2") {
    reports.push_back(onm::verify::run_lemma2(args.seed));
  } else if (args.suite == "lemma3") {
    reports.push_back(onm::verify::run_lemma3(args.seed));
  } else if (args.suite == "lemma4") {
    reports.push_back(onm::verify::run_lemma4());
  } else {
    reports.push_back(onm::verify::run_derivatives(args.seed));
  }
  bool pass = true;
  for (const auto& report : reports) {
    std::cout << onm::verify::format_report(report);
    pass = pass && report.pass;
  }
  return pass ? kOk : kVerifyFailure;
}

void print_checklist(const onm::analysis::AssumptionChecklist& c) {
  const auto line = [](const char* name, const onm::analysis::AssumptionCheck& check) {
    std::cout << "  " << name << "  " << (check.pass ? "pass" : "FAIL")
              << "  lhs=" << onm::io::format_double(check.lhs)
              << " rhs=" << onm::io::format_double(check.rhs) << "\n";
  };
  std::cout << "assumption checklist:\n";
  line("hessian_nonsingular", c.hessian_nonsingular);
  line("hessian_lipschitz", c.hessian_lipschitz);
  line("initial_in_basin", c.initial_in_basin);
  line("motion_bounded", c.motion_bounded);
  line("value_lipschitz", c.value_lipschitz);
}

int cmd_bounds(const BoundsArgs& args) {
  onm::oracles::RegularityConstants k;
  double V_T = 0.0;
  double e0 = args.e0;
  double eT = 0.0;

  if (args.explicit_mode) {
    k = onm::oracles::RegularityConstants::make(args.h, args.L, args.beta, args.ell, args.vbar,
                                                args.Vbar);
    eT = args.eT.value_or(e0);
    V_T = args.VT.value_or(args.Vbar);
  } else {
    onm::bench::ExperimentConfig config = onm::io::load_config(args.config_path);
    if (args.seed) config.master_seed = *args.seed;
    const auto rep = onm::bench::run_replication(config, 0);
    if (rep.partial) {
      std::cerr << "error: estimation replication failed at round " << rep.failed_round << ": "
                << rep.failure << "\n";
      return kRuntimeFailure;
    }
    if (!rep.constants) {
      std::cerr << "error: constants unavailable: " << rep.constants_note << "\n";
      return kRuntimeFailure;
    }
    k = *rep.constants;
    const onm::analysis::RegretLedger* ledger = nullptr;
    for (const auto& r : rep.results) {
      if (r.algorithm == onm::bench::Algorithm::onm) ledger = &r.ledger;
    }
    if (ledger == nullptr) {
      std::cerr << "error: the config does not run the Newton tracker\n";
      return kRuntimeFailure;
    }
    e0 = ledger->e0();
    eT = ledger->eT();
    V_T = ledger->V_T;
  }

  const auto d = onm::io::format_double;
  std::cout << "constants: h=" << d(k.h) << " L=" << d(k.L) << " beta=" << d(k.beta)
            << " ell=" << d(k.ell) << " gamma=" << d(k.gamma) << " v_bar=" << d(k.v_bar)
            << " V_bar=" << d(k.V_bar) << "\n"
            << "inputs: V_T=" << d(V_T) << " e0=" << d(e0) << " eT=" << d(eT) << "\n";

  try {
    const auto report = onm::analysis::bound_comparison(k, V_T, e0, eT);
    print_checklist(report.theorem1.checklist);
    std::cout << "theorem1_bound=" << d(report.theorem1.bound)
              << " factor=" << d(report.theorem1.factor) << " delta=" << d(report.theorem1.delta)
              << "\n"
              << "corollary1_bound=" << d(report.corollary1.bound)
              << " E_lower=" << d(report.corollary1.E_lower)
              << " E_upper=" << d(report.corollary1.E_upper)
              << " discriminant=" << d(report.corollary1.discriminant) << "\n"
              << "corollary_no_larger=" << (report.corollary_no_larger ? "true" : "false")
              << "\n";
    const auto& scan = report.tightness;
    std::cout << "tightness: holding=" << scan.holding << "/" << scan.points
              << " for_all_y=" << (scan.for_all_y ? "true" : "false")
              << " for_some_y=" << (scan.for_some_y ? "true" : "false")
              << " smallest_y=" << d(scan.smallest_y)
              << " ybar_exists=" << (scan.ybar_exists ? "true" : "false")
              << " ybar=" << d(scan.ybar) << "\n";
  } catch (const onm::analysis::ConditionFailed& e) {
    const auto t1 = onm::analysis::theorem1_bound(k, V_T, e0, eT);
    print_checklist(t1.checklist);
    std::cout << "theorem1_bound=" << d(t1.bound) << " factor=" << d(t1.factor)
              << " delta=" << d(t1.delta) << "\n"
              << "corollary1_bound unavailable: " << e.what() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online Newton tracking: experiments, property suites and regret bounds"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run an experiment config and write CSV/JSON outputs");
  run->add_option("--config", run_args.config_path, "experiment config (JSON)")->required();
  run->add_option("--out", run_args.out_dir, "output directory (default: out)");
  run->add_option("--seed", run_args.seed, "override the master seed");
  run->add_option("--replications", run_args.replications, "override the replication count");
  run->add_option("--threads", run_args.threads, "worker threads (0 = auto)");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "run randomized property suites");
  verify->add_option("suite", verify_args.suite, "one of lemma1..lemma4, derivatives, all")
      ->check(CLI::IsMember({"lemma1", "lemma2", "lemma3", "lemma4", "derivatives", "all"}));
  verify->add_option("--seed", verify_args.seed, "suite seed (default 7)");

  BoundsArgs bounds_args;
  auto* bounds =
      app.add_subcommand("bounds", "evaluate the regret bounds and the assumption checklist");
  bounds->set_help_flag("--help", "print this help message and exit");
  auto* bounds_config =
      bounds->add_option("--config", bounds_args.config_path,
                         "estimate constants from replication 0 of this config");
  bounds->add_option("--seed", bounds_args.seed, "override the master seed");
  auto* opt_h = bounds->add_option("--h", bounds_args.h, "curvature floor at the optima");
  bounds->add_option("--L", bounds_args.L, "Hessian variation modulus");
  bounds->add_option("--ell", bounds_args.ell, "value variation modulus");
  bounds->add_option("--beta", bounds_args.beta, "radius backing L");
  bounds->add_option("--vbar", bounds_args.vbar, "max per-round optimum motion");
  bounds->add_option("--Vbar", bounds_args.Vbar, "total optimum motion budget");
  bounds->add_option("--e0", bounds_args.e0, "initial tracking error");
  bounds->add_option("--eT", bounds_args.eT, "final tracking error (default: e0)");
  bounds->add_option("--VT", bounds_args.VT, "realized total variation (default: Vbar)");
  bounds_config->excludes(opt_h);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  bounds_args.explicit_mode = bounds_args.config_path.empty();
  if (*bounds && bounds_args.explicit_mode && opt_h->count() == 0) {
    std::cerr << "error: bounds needs either --config or explicit constants (--h --L --ell "
                 "--beta ...)\n";
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*verify) return cmd_verify(verify_args);
    return cmd_bounds(bounds_args);
  } catch (const onm::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const onm::analysis::AssumptionViolated& e) {
    std::cerr << "assumption violated: " << e.assumption() << ": " << e.what() << "\n";
    return kAssumptionViolated;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}
