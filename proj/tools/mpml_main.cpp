// Batch front door: config in, report.json + tables/*.csv out.
//
//   mpml <subcommand> --config cfg.json [--seed N] [--out DIR] [--deterministic]
//
// Exit codes: 0 success, 1 config error, 2 precision failure.

#include <cstdint>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mpml/cli.hpp"
#include "mpml/types.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "master seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_flag("--deterministic", args.deterministic,
                "suppress the timestamp field for byte-identical reports");
}

int execute(const std::string& subcommand, const CommonArgs& args) {
  try {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) throw mpml::config_error("cannot read config file '" + args.config_path + "'");
    mpml::cli::Json cfg;
    in >> cfg;
    if (cfg.contains("subcommand")) {
      const std::string s = cfg["subcommand"].get<std::string>();
      if (s != subcommand) {
        throw mpml::config_error("config subcommand '" + s + "' does not match '" +
                                 subcommand + "'");
      }
    } else {
      cfg["subcommand"] = subcommand;
    }
    mpml::cli::RunOptions opts;
    if (!args.out_dir.empty()) opts.out_dir = args.out_dir;
    if (args.seed_set) opts.seed = args.seed;
    opts.deterministic = args.deterministic;
    const mpml::cli::RunResult res = mpml::cli::run_config(cfg, opts);
    std::cout << res.summary << " -> " << res.report_path << "\n";
    return res.exit_code;
  } catch (const mpml::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const mpml::impropriety_error& e) {
    std::cerr << "impropriety: " << e.what() << "\n";
    return 2;
  } catch (const mpml::convergence_error& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"profile-marginal prior construction and risk experiments"};
  app.require_subcommand(1);

  const char* names[] = {"estimate", "prior-eval", "order-check", "risk-sim",
                         "predictor-kl"};
  const char* descs[] = {
      "four-estimator report for one dataset",
      "evaluate priors on a (lambda, psi) grid",
      "replicated asymptotic-order protocols",
      "seeded Monte-Carlo risk comparison",
      "posterior-expected predictive KL curve over psi"};
  CommonArgs args[5];
  for (int i = 0; i < 5; ++i) {
    CLI::App* cmd = app.add_subcommand(names[i], descs[i]);
    add_common(cmd, args[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 5; ++i) {
    if (app.get_subcommand(names[i])->parsed()) return execute(names[i], args[i]);
  }
  return 1;
}
