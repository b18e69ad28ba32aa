#include <CLI11.hpp>
#include <iostream>

#include "ricci2d/app.hpp"
#include "ricci2d/errors.hpp"

using namespace ricci2d;

int main(int argc, char** argv) {
  CLI::App cli{"Numerical study of the maximal solution of u_t = Lap log u"};
  cli.require_subcommand(1);

  std::string config_path, out_dir, checks;
  std::uint64_t seed = 0;
  auto* run = cli.add_subcommand("run", "integrate one experiment and write its run directory");
  run->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides outputs.dir)");
  run->add_option("--seed", seed, "sampling seed (overrides seed)");
  run->add_option("--checks", checks, "comma-separated checks to keep enabled");

  std::string case_name;
  int refine = 3;
  auto* verify = cli.add_subcommand("verify-exact", "residual convergence for an exact solution");
  verify->add_option("--case", case_name, "cigar | cusp | inner-steady | outer-steady")->required();
  verify->add_option("--refine", refine, "number of h-halvings (>= 2)");

  std::string run_dir;
  auto* report = cli.add_subcommand("report", "evaluate checks on a run directory");
  report->add_option("--out", run_dir, "run directory")->required();
  report->add_option("--checks", checks, "comma-separated subset of checks");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kUsage;
  }

  try {
    if (*run) {
      app::ExperimentConfig c = app::load_config(config_path);
      if (!out_dir.empty()) c.outputs.dir = out_dir;
      if (run->count("--seed")) c.seed = seed;
      if (run->count("--checks")) {
        const auto keep = app::parse_check_list(checks);
        for (auto& [name, spec] : c.checks) spec.enabled = keep.count(name) > 0;
      }
      return app::cmd_run(c, std::cout);
    }
    if (*verify) return app::cmd_verify_exact(case_name, refine, std::cout);
    if (*report) return app::cmd_report(run_dir, app::parse_check_list(checks), std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kUsage;
  }
  return app::kUsage;
}
