#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ricci2d/config.hpp"
#include "ricci2d/diagnostics.hpp"
#include "ricci2d/rescale.hpp"
#include "ricci2d/runner.hpp"

namespace ricci2d::app {

enum ExitCode : int { kOk = 0, kCheckFailure = 1, kStiffness = 2, kIoError = 3, kUsage = 4 };

std::string code_version();

// Printed in every report header.
extern const char* const kTEstDefinition;

solver::RunOptions run_options(const ExperimentConfig& c);

// Writes into c.outputs.dir:
//   config.json, run.json, records.csv, comparison.csv,
//   snapshots/tau_<k>.json, frames/frame_<k>.ckpt, final.ckpt
// On stiffness failure the last good state goes to failure.ckpt.
int cmd_run(const ExperimentConfig& c, std::ostream& log);

// One worker thread per run; returns the exit codes in input order.
std::vector<int> run_many(const std::vector<ExperimentConfig>& configs, std::ostream& log);

int cmd_verify_exact(const std::string& case_name, int refinements, std::ostream& out);

struct CuspRow {
  double t = 0.0;
  double excess = 0.0;
  double continuum_excess = 0.0;
};

struct RunData {
  std::string dir;
  ExperimentConfig config;
  std::string config_hash;
  std::string version;
  double T_est = 0.0;
  double M0 = 0.0;
  double cusp_offset = 0.0;
  double zeta_shift = 0.0;
  std::string stop_reason;
  std::vector<diag::DiagnosticsRecord> records;
  std::vector<CuspRow> comparison;
  std::vector<rescale::ProfileSnapshot> snapshots;  // sorted by tau
  std::vector<FlowState> frames;                    // sorted by t
};

// Throws IoError for missing files, ParseError for malformed contents.
RunData load_run_dir(const std::string& dir);

std::vector<CuspRow> read_comparison_csv(std::istream& is);

enum class Verdict { Pass, Fail, Flag };
std::string to_string(Verdict v);

struct PlotTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::Flag;
  std::string detail;
  std::map<std::string, double> measured;
  PlotTable plot;
};

struct Report {
  std::string run_dir;
  std::string config_hash;
  std::string version;
  double T_est = 0.0;
  std::string T_est_definition;
  std::vector<CheckResult> checks;

  bool any_failed() const;
};

// Evaluates every enabled check (restricted to `only` when non-empty). Pure in `run`.
Report evaluate_checks(const RunData& run, const std::set<std::string>& only = {});

std::string render_report(const Report& r);

// Writes report.json and report/<check>.csv into the run directory.
int cmd_report(const std::string& dir, const std::set<std::string>& only, std::ostream& out);

// Splits a comma-separated check list; throws ConfigError on unknown names.
std::set<std::string> parse_check_list(const std::string& list);

}  // namespace ricci2d::app
