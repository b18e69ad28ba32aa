#include "ricci2d/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ricci2d/checkpoint.hpp"
#include "ricci2d/errors.hpp"
#include "ricci2d/exact.hpp"
#include "ricci2d/runner.hpp"

#ifndef RICCI2D_VERSION
#define RICCI2D_VERSION "0.0.0"
#endif

namespace ricci2d::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::string code_version() { return RICCI2D_VERSION; }

const char* const kTEstDefinition =
    "T_est = t0 + M(t0)/(4 pi): extinction time of the mass law started from the regularized "
    "datum at t0. All tau = 1/(T_est - t) comparisons use T_est; the extinction time of the "
    "unregularized datum is not verified.";

solver::RunOptions run_options(const ExperimentConfig& c) {
  solver::RunOptions o;
  o.datum = c.datum;
  o.grid = c.grid;
  o.policy = c.policy;
  o.record_stride = c.outputs.record_stride;
  o.snapshot_grids = c.outputs.grids;
  o.mono_pairs = c.outputs.mono_pairs;
  o.seed = c.seed;
  o.keep_frames = c.outputs.frames;
  o.failure_checkpoint = (fs::path(c.outputs.dir) / "failure.ckpt").string();
  return o;
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string indexed(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, k, ext);
  return buf;
}

void write_outputs(const ExperimentConfig& c, const solver::Trajectory& tr) {
  const fs::path dir(c.outputs.dir);
  const std::string rendered = render_config(c);
  const std::string hash = fnv1a_hex(rendered);

  {
    auto os = open_out(dir / "records.csv");
    diag::write_csv(os, tr.records);
  }
  {
    auto os = open_out(dir / "comparison.csv");
    os << "t,cusp_excess,continuum_cusp_excess\n";
    for (std::size_t k = 0; k < tr.records.size(); ++k)
      os << fmt17(tr.records[k].t) << ',' << fmt17(tr.cusp_excess[k]) << ','
         << fmt17(tr.continuum_cusp_excess[k]) << '\n';
  }
  fs::create_directories(dir / "snapshots");
  json snaps = json::array();
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const std::string name = indexed("tau", k, ".json");
    auto os = open_out(dir / "snapshots" / name);
    os << rescale::serialize(tr.snapshots[k]);
    snaps.push_back({{"file", "snapshots/" + name}, {"tau", tr.snapshots[k].tau}});
  }
  json frames = json::array();
  if (!tr.frames.empty()) fs::create_directories(dir / "frames");
  for (std::size_t k = 0; k < tr.frames.size(); ++k) {
    const std::string name = indexed("frame", k, ".ckpt");
    write_checkpoint((dir / "frames" / name).string(), tr.frames[k], hash);
    frames.push_back({{"file", "frames/" + name}, {"t", tr.frames[k].t}});
  }
  write_checkpoint((dir / "final.ckpt").string(), tr.final_state, hash);

  json meta = {{"version", code_version()},
               {"config_hash", hash},
               {"T_est", tr.T_est},
               {"T_est_definition", kTEstDefinition},
               {"M0", tr.M0},
               {"t0", c.datum.t0},
               {"rho", c.datum.rho},
               {"n_theta", c.grid.n_theta},
               {"seed", c.seed},
               {"cusp_offset", tr.cusp_offset},
               {"zeta_shift", tr.zeta_shift},
               {"stop_reason", tr.stop_reason},
               {"steps", tr.steps},
               {"rejections", tr.rejections},
               {"final_t", tr.final_state.t},
               {"snapshots", snaps},
               {"frames", frames}};
  auto os = open_out(dir / "run.json");
  os << meta.dump(2) << '\n';
  if (!os) throw IoError("failed writing run.json");
}

}  // namespace

int cmd_run(const ExperimentConfig& c, std::ostream& log) {
  const fs::path dir(c.outputs.dir);
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    auto os = open_out(dir / "config.json");
    os << render_config(c);
    if (!os) throw IoError("failed writing config.json");
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kIoError;
  }

  solver::Trajectory tr;
  try {
    tr = solver::run(run_options(c));
  } catch (const StiffnessFailure& e) {
    log << "stiffness failure: " << e.what();
    if (!e.checkpoint_path().empty()) log << " (last good state: " << e.checkpoint_path() << ")";
    log << '\n';
    return kStiffness;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kIoError;
  }

  try {
    write_outputs(c, tr);
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kIoError;
  }
  const auto& last = tr.records.back();
  log << "run complete: " << tr.stop_reason << ", steps " << tr.steps << ", T_est "
      << fmt17(tr.T_est) << ", final tau " << fmt17(last.tau) << ", output " << dir.string()
      << '\n';
  return kOk;
}

std::vector<int> run_many(const std::vector<ExperimentConfig>& configs, std::ostream& log) {
  std::vector<std::future<std::pair<int, std::string>>> jobs;
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async, [&c] {
      std::ostringstream os;
      const int code = cmd_run(c, os);
      return std::make_pair(code, os.str());
    }));
  std::vector<int> codes;
  for (auto& j : jobs) {
    auto [code, text] = j.get();
    log << text;
    codes.push_back(code);
  }
  return codes;
}

int cmd_verify_exact(const std::string& case_name, int refinements, std::ostream& out) {
  const auto names = exact::exact_case_names();
  if (std::find(names.begin(), names.end(), case_name) == names.end()) {
    out << "error: unknown case '" << case_name << "'\n";
    return kUsage;
  }
  if (refinements < 2) {
    out << "error: --refine must be >= 2\n";
    return kUsage;
  }
  const auto study = exact::convergence_study(case_name, refinements);
  char line[160];
  out << "case " << case_name << "\n";
  std::snprintf(line, sizeof line, "%-14s %-24s %s\n", "h", "max |residual|", "order");
  out << line;
  for (std::size_t k = 0; k < study.levels.size(); ++k) {
    const auto& l = study.levels[k];
    if (k == 0)
      std::snprintf(line, sizeof line, "%-14.6e %-24.16e %s\n", l.h, l.residual, "-");
    else
      std::snprintf(line, sizeof line, "%-14.6e %-24.16e %.4f\n", l.h, l.residual, l.order);
    out << line;
  }
  if (case_name == "outer-steady")
    out << "exact branch (xi < T) residual " << fmt17(study.exact_branch_residual) << "\n";
  out << (study.pass ? "PASS" : "FAIL") << " (order in [" << exact::kOrderLo << ", "
      << exact::kOrderHi << "])\n";
  return study.pass ? kOk : kCheckFailure;
}

std::vector<CuspRow> read_comparison_csv(std::istream& is) {
  std::string line;
  std::size_t n = 0;
  if (!std::getline(is, line)) throw ParseError("comparison.csv: missing header", 1);
  ++n;
  if (line != "t,cusp_excess,continuum_cusp_excess")
    throw ParseError("comparison.csv: unexpected header", n);
  std::vector<CuspRow> rows;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    double v[3];
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t end = line.find(',', pos);
      if ((k < 2) != (end != std::string::npos))
        throw ParseError("comparison.csv: expected 3 fields", n);
      const std::string tok = line.substr(pos, end == std::string::npos ? end : end - pos);
      char* stop = nullptr;
      v[k] = std::strtod(tok.c_str(), &stop);
      if (tok.empty() || *stop != '\0') throw ParseError("comparison.csv: bad number '" + tok + "'", n);
      pos = end + 1;
    }
    rows.push_back({v[0], v[1], v[2]});
  }
  return rows;
}

RunData load_run_dir(const std::string& dir_s) {
  const fs::path dir(dir_s);
  if (!fs::is_directory(dir)) throw IoError("run directory '" + dir_s + "' does not exist");
  RunData d;
  d.dir = dir_s;
  d.config = parse_config(slurp(dir / "config.json"));
  json meta;
  try {
    meta = json::parse(slurp(dir / "run.json"));
    d.config_hash = meta.at("config_hash").get<std::string>();
    d.version = meta.at("version").get<std::string>();
    d.T_est = meta.at("T_est").get<double>();
    d.M0 = meta.at("M0").get<double>();
    d.cusp_offset = meta.at("cusp_offset").get<double>();
    d.zeta_shift = meta.at("zeta_shift").get<double>();
    d.stop_reason = meta.at("stop_reason").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("run.json: ") + e.what(), 1);
  }
  {
    std::ifstream is(dir / "records.csv");
    if (!is) throw IoError("cannot read records.csv");
    d.records = diag::read_csv(is);
  }
  if (fs::exists(dir / "comparison.csv")) {
    std::ifstream is(dir / "comparison.csv");
    d.comparison = read_comparison_csv(is);
  }
  for (const auto& s : meta.value("snapshots", json::array())) {
    const fs::path p = dir / s.at("file").get<std::string>();
    if (fs::exists(p)) d.snapshots.push_back(rescale::deserialize(slurp(p)));
  }
  for (const auto& f : meta.value("frames", json::array())) {
    const fs::path p = dir / f.at("file").get<std::string>();
    if (fs::exists(p)) d.frames.push_back(read_checkpoint(p.string()).state);
  }
  std::sort(d.snapshots.begin(), d.snapshots.end(),
            [](const auto& a, const auto& b) { return a.tau < b.tau; });
  std::sort(d.frames.begin(), d.frames.end(),
            [](const auto& a, const auto& b) { return a.t < b.t; });
  return d;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Flag: return "flag";
  }
  return "flag";
}

bool Report::any_failed() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.verdict == Verdict::Fail; });
}

namespace {

constexpr double kTauMatch = 1e-6;

bool tau_matches(double a, double b) { return std::abs(a - b) <= kTauMatch * std::max(1.0, b); }

double final_tau(const RunData& r) { return r.records.empty() ? 0.0 : r.records.back().tau; }

// Flag instead of evaluating when the run never reached `tau`.
bool reached(const RunData& r, double tau, CheckResult& out) {
  if (final_tau(r) + kTauMatch * std::max(1.0, tau) >= tau) return true;
  out.verdict = Verdict::Flag;
  out.detail = "insufficient tau: run ends at tau = " + fmt17(final_tau(r)) + " < " + fmt17(tau);
  return false;
}

const diag::DiagnosticsRecord* record_at(const RunData& r, double tau) {
  for (const auto& rec : r.records)
    if (tau_matches(rec.tau, tau)) return &rec;
  return nullptr;
}

const rescale::ProfileSnapshot* snapshot_at(const RunData& r, double tau, CheckResult& out) {
  for (const auto& s : r.snapshots)
    if (tau_matches(s.tau, tau)) return &s;
  out.verdict = Verdict::Flag;
  out.detail = "no snapshot at tau = " + fmt17(tau);
  return nullptr;
}

Verdict pass_if(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = a + (b - a) * k / (n - 1);
  return x;
}

double interp1(const std::vector<double>& x, const std::vector<double>& y, double at) {
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::size_t k = std::clamp<std::size_t>(it - x.begin(), 1, x.size() - 1);
  const double s = (at - x[k - 1]) / (x[k] - x[k - 1]);
  return y[k - 1] + s * (y[k] - y[k - 1]);
}

using Params = std::map<std::string, double>;

void check_mass_law(const RunData& r, const Params& p, CheckResult& out) {
  const auto audit = diag::mass_audit(r.records);
  const auto& r0 = r.records.front();
  out.measured["max_rel_deviation"] = audit.max_rel_deviation;
  out.measured["worst_t"] = r.records[audit.worst_index].t;
  out.plot.columns = {"t", "theory_mass", "measured_mass"};
  for (const auto& rec : r.records)
    out.plot.rows.push_back({rec.t, r0.mass - kFourPi * (rec.t - r0.t), rec.mass});
  out.verdict = pass_if(audit.max_rel_deviation <= p.at("tol"));
  out.detail = "max |M - M0 + 4 pi (t - t0)|/M0 = " + fmt17(audit.max_rel_deviation);
}

void check_rmax_band(const RunData& r, const Params& p, CheckResult& out) {
  if (!reached(r, p.at("tau_hi"), out)) return;
  const double T = r.T_est;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  out.plot.columns = {"tau", "band_lo", "band_hi", "measured"};
  for (const auto& rec : r.records) {
    if (rec.tau < p.at("tau_lo") * (1 - kTauMatch) || rec.tau > p.at("tau_hi") * (1 + kTauMatch))
      continue;
    lo = std::min(lo, rec.rmax_scaled);
    hi = std::max(hi, rec.rmax_scaled);
    out.plot.rows.push_back({rec.tau, p.at("lo") * T, p.at("hi") * T, rec.rmax_scaled});
  }
  out.measured["min_over_T"] = lo / T;
  out.measured["max_over_T"] = hi / T;
  out.verdict = pass_if(lo >= p.at("lo") * T && hi <= p.at("hi") * T);
  out.detail = "(T-t)^2 Rmax / T_est in [" + fmt17(lo / T) + ", " + fmt17(hi / T) + "]";
}

void check_origin_curvature(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const auto* rec = record_at(r, tau);
  if (!rec) {
    out.verdict = Verdict::Flag;
    out.detail = "no record at tau = " + fmt17(tau);
    return;
  }
  const double target = 2.0 * r.T_est;
  const double err = std::abs(rec->origin_curv_scaled - target) / target;
  out.measured["scaled_origin_curvature"] = rec->origin_curv_scaled;
  out.measured["two_T_est"] = target;
  out.measured["rel_error"] = err;
  out.plot.columns = {"tau", "theory", "measured"};
  for (const auto& x : r.records) out.plot.rows.push_back({x.tau, target, x.origin_curv_scaled});
  out.verdict = pass_if(err <= p.at("tol"));
  out.detail = "(T-t)^2 R(0) = " + fmt17(rec->origin_curv_scaled) + " vs 2 T_est, rel error " +
               fmt17(err);
}

void check_width_band(const RunData& r, const Params& p, CheckResult& out) {
  if (!reached(r, p.at("tau_hi"), out)) return;
  const double plateau = kTwoPi * std::sqrt(2.0 / r.T_est);
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  out.plot.columns = {"tau", "plateau", "measured"};
  for (const auto& rec : r.records) {
    if (rec.tau < p.at("tau_lo") * (1 - kTauMatch) || rec.tau > p.at("tau_hi") * (1 + kTauMatch))
      continue;
    lo = std::min(lo, rec.width_scaled);
    hi = std::max(hi, rec.width_scaled);
    out.plot.rows.push_back({rec.tau, plateau, rec.width_scaled});
  }
  // Trend between scheduled taus: d log W / d log tau must not increase.
  std::vector<double> taus, ws;
  for (double s : r.config.policy.tau_schedule) {
    if (s < p.at("tau_lo") * (1 - kTauMatch) || s > p.at("tau_hi") * (1 + kTauMatch)) continue;
    if (const auto* rec = record_at(r, s)) {
      taus.push_back(rec->tau);
      ws.push_back(rec->width_scaled);
    }
  }
  std::sort(taus.begin(), taus.end());
  bool trend = true;
  double prev = HUGE_VAL;
  for (std::size_t k = 1; k < taus.size(); ++k) {
    const double rate = std::log(ws[k] / ws[k - 1]) / std::log(taus[k] / taus[k - 1]);
    out.measured["rate_" + fmt17(taus[k - 1]) + "_" + fmt17(taus[k])] = rate;
    if (rate > prev + p.at("rate_slack")) trend = false;
    prev = rate;
  }
  out.measured["min_over_plateau"] = lo / plateau;
  out.measured["max_over_plateau"] = hi / plateau;
  out.measured["plateau"] = plateau;
  const bool band = lo >= p.at("lo") * plateau && hi <= p.at("hi") * plateau;
  out.verdict = pass_if(band && trend && taus.size() >= 3);
  out.detail = "W/(T-t) / (2 pi sqrt(2/T_est)) in [" + fmt17(lo / plateau) + ", " +
               fmt17(hi / plateau) + "], log-rate " + (trend ? "nonincreasing" : "increasing");
  if (taus.size() < 3) out.detail += ", fewer than 3 scheduled taus in window";
}

void check_inner_profile(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const auto* s = snapshot_at(r, tau, out);
  if (!s) return;
  const double T = s->T_est;
  double sup = 0.0;
  out.plot.columns = {"y", "theory", "measured"};
  for (std::size_t k = 0; k < s->y.size(); ++k) {
    if (s->y[k] > p.at("y_max") * (1 + 1e-12)) continue;
    const double lim = exact::inner_profile_limit({s->y[k], 0.0}, T);
    sup = std::max(sup, std::abs(s->inner[k] - lim));
    out.plot.rows.push_back({s->y[k], lim, s->inner[k]});
  }
  const double lam_err = std::abs(s->lambda_fit - 0.5 * T) / (0.5 * T);
  out.measured["sup_distance"] = sup;
  out.measured["lambda_fit"] = s->lambda_fit;
  out.measured["half_T_est"] = 0.5 * T;
  out.measured["lambda_rel_error"] = lam_err;
  out.verdict = pass_if(sup <= p.at("tol") && lam_err <= p.at("lambda_tol"));
  out.detail = "sup |u~ - 1/((T/2)y^2+1)| = " + fmt17(sup) + ", lambda_fit = " +
               fmt17(s->lambda_fit) + " (rel error " + fmt17(lam_err) + ")";
}

void check_alpha_rate(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const double target = 2.0 * r.T_est;
  std::vector<double> x, y;
  out.plot.columns = {"tau", "theory_log_alpha_over_tau", "measured_log_alpha_over_tau"};
  for (const auto& rec : r.records) {
    out.plot.rows.push_back({rec.tau, target, std::log(rec.alpha) / rec.tau});
    if (rec.tau < 0.1 * tau * (1 - kTauMatch) || rec.tau > tau * (1 + kTauMatch)) continue;
    x.push_back(rec.tau);
    y.push_back(std::log(rec.alpha));
  }
  const auto* end = record_at(r, tau);
  if (x.size() < 3 || !end) {
    out.verdict = Verdict::Flag;
    out.detail = "too few records in the last tau-decade";
    return;
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  const double slope = sxy / sxx;
  const double ratio = std::log(end->alpha) / end->tau;
  const double e_slope = std::abs(slope - target) / target;
  const double e_ratio = std::abs(ratio - target) / target;
  out.measured["slope"] = slope;
  out.measured["log_alpha_over_tau"] = ratio;
  out.measured["two_T_est"] = target;
  out.measured["slope_rel_error"] = e_slope;
  out.measured["ratio_rel_error"] = e_ratio;
  out.verdict = pass_if(e_slope <= p.at("tol") && e_ratio <= p.at("tol"));
  out.detail = "d log(alpha)/d tau over last decade = " + fmt17(slope) + ", log(alpha)/tau = " +
               fmt17(ratio) + " vs 2 T_est = " + fmt17(target);
}

void check_xi_front(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const auto* rec = record_at(r, tau);
  if (!rec) {
    out.verdict = Verdict::Flag;
    out.detail = "no record at tau = " + fmt17(tau);
    return;
  }
  const double err = std::abs(rec->xi_front - r.T_est) / r.T_est;
  out.measured["xi_front"] = rec->xi_front;
  out.measured["rel_error"] = err;
  out.plot.columns = {"tau", "theory", "measured"};
  for (const auto& x : r.records) out.plot.rows.push_back({x.tau, r.T_est, x.xi_front});
  out.verdict = pass_if(err <= p.at("tol"));
  out.detail = "xi_front = " + fmt17(rec->xi_front) + " vs T_est, rel error " + fmt17(err);
}

void check_outer_profile(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const auto* s = snapshot_at(r, tau, out);
  if (!s) return;
  const double T = s->T_est;
  const double lo = T + p.at("gap"), hi = p.at("xi_hi");
  if (s->xi.empty() || s->xi.back() < hi * (1 - 1e-12)) {
    out.verdict = Verdict::Flag;
    out.detail = "snapshot xi range does not reach " + fmt17(hi);
    return;
  }
  const std::size_t nt = static_cast<std::size_t>(s->n_theta);
  double sup = 0.0;
  out.plot.columns = {"xi", "theory", "measured_theta_mean"};
  for (std::size_t k = 0; k < s->xi.size(); ++k) {
    const double xi = s->xi[k];
    double mean = 0.0;
    for (std::size_t j = 0; j < nt; ++j) mean += s->outer[k * nt + j] / nt;
    out.plot.rows.push_back({xi, exact::outer_profile_limit(xi == T ? xi * (1 + 1e-15) : xi, T),
                             mean});
    if (xi < lo || xi > hi * (1 + 1e-12)) continue;
    const double lim = 2.0 * T / (xi * xi);
    for (std::size_t j = 0; j < nt; ++j)
      sup = std::max(sup, std::abs(s->outer[k * nt + j] - lim) / lim);
  }
  const double xc = p.at("collapse_factor") * T;
  double collapse = 0.0;
  if (xc >= s->xi.front()) {
    for (std::size_t j = 0; j < nt; ++j) {
      std::vector<double> col(s->xi.size());
      for (std::size_t k = 0; k < s->xi.size(); ++k) col[k] = s->outer[k * nt + j];
      collapse = std::max(collapse, interp1(s->xi, col, xc));
    }
  } else {
    out.verdict = Verdict::Flag;
    out.detail = "snapshot xi range starts above " + fmt17(xc);
    return;
  }
  out.measured["rel_sup_distance"] = sup;
  out.measured["v_at_collapse_xi"] = collapse;
  out.verdict = pass_if(sup <= p.at("tol") && collapse <= p.at("collapse_max"));
  out.detail = "sup |v~ - 2T/xi^2|/(2T/xi^2) on [T+" + fmt17(p.at("gap")) + ", " + fmt17(hi) +
               "] = " + fmt17(sup) + ", v~(" + fmt17(p.at("collapse_factor")) + " T) = " +
               fmt17(collapse);
}

void check_tail_area(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const auto* s = snapshot_at(r, tau, out);
  if (!s) return;
  const double T = s->T_est;
  double worst = 0.0;
  out.plot.columns = {"eta", "theory", "measured"};
  try {
    for (double eta : linspace(p.at("eta_lo"), p.at("eta_hi"), 7)) {
      const double lim = kFourPi * T / eta;
      const double a = diag::tail_area(*s, eta);
      worst = std::max(worst, std::abs(a - lim) / lim);
      out.plot.rows.push_back({eta, lim, a});
    }
  } catch (const RangeError& e) {
    out.verdict = Verdict::Flag;
    out.detail = e.what();
    return;
  }
  out.measured["max_rel_error"] = worst;
  out.verdict = pass_if(worst <= p.at("tol"));
  out.detail = "max |A(eta) - 4 pi T/eta| / (4 pi T/eta) = " + fmt17(worst);
}

void check_log_theta_avg(const RunData& r, const Params& p, CheckResult& out) {
  const double tau = p.at("tau");
  if (!reached(r, tau, out)) return;
  const auto* s = snapshot_at(r, tau, out);
  if (!s) return;
  const double T = s->T_est;
  double worst = 0.0;
  out.plot.columns = {"xi", "theory", "measured"};
  try {
    for (double xi : linspace(p.at("xi_lo"), p.at("xi_hi"), 7)) {
      const double lim = kTwoPi * std::log(2.0 * T / (xi * xi));
      const double m = diag::log_theta_avg(*s, xi);
      worst = std::max(worst, std::abs(m - lim) / std::abs(lim));
      out.plot.rows.push_back({xi, lim, m});
    }
  } catch (const RangeError& e) {
    out.verdict = Verdict::Flag;
    out.detail = e.what();
    return;
  }
  out.measured["max_rel_error"] = worst;
  out.verdict = pass_if(worst <= p.at("tol"));
  out.detail = "max |L(xi) - 2 pi log(2T/xi^2)| / |2 pi log(2T/xi^2)| = " + fmt17(worst);
}

void check_aronson_benilan(const RunData& r, const Params& p, CheckResult& out) {
  double worst = HUGE_VAL;
  out.plot.columns = {"t", "bound", "measured_margin"};
  for (const auto& rec : r.records) {
    worst = std::min(worst, rec.ab_margin);
    out.plot.rows.push_back({rec.t, 0.0, rec.ab_margin});
  }
  out.measured["min_margin"] = worst;
  out.verdict = pass_if(worst >= -p.at("tol"));
  out.detail = "min over records of min(R + 1/t) = " + fmt17(worst);
}

void check_monotonicity(const RunData& r, const Params& p, CheckResult& out) {
  double worst = -HUGE_VAL;
  out.plot.columns = {"t", "bound", "measured_violation"};
  for (const auto& rec : r.records) {
    worst = std::max(worst, rec.mono_violation);
    out.plot.rows.push_back({rec.t, 0.0, rec.mono_violation});
  }
  out.measured["max_violation"] = worst;
  out.verdict = pass_if(worst <= p.at("tol"));
  out.detail = "max over records of u(y) - u(x) = " + fmt17(worst);
}

void check_anisotropy(const RunData& r, const Params& p, CheckResult& out) {
  const double xi = p.at("xi_factor") * r.T_est;
  std::vector<std::pair<double, double>> seq;
  for (const auto& s : r.snapshots) {
    if (s.xi.empty() || xi < s.xi.front() || xi > s.xi.back()) continue;
    seq.emplace_back(s.tau, diag::anisotropy(s, xi));
  }
  if (seq.size() < 2) {
    out.verdict = Verdict::Flag;
    out.detail = "fewer than two snapshots cover xi = " + fmt17(xi);
    return;
  }
  bool decreasing = true;
  out.plot.columns = {"tau", "theory", "measured"};
  for (std::size_t k = 0; k < seq.size(); ++k) {
    out.plot.rows.push_back({seq[k].first, 1.0, seq[k].second});
    if (k > 0 && seq[k].second > seq[k - 1].second + p.at("slack")) decreasing = false;
  }
  out.measured["first"] = seq.front().second;
  out.measured["final"] = seq.back().second;
  out.measured["final_tau"] = seq.back().first;
  out.verdict = pass_if(decreasing && seq.back().second <= p.at("max_final"));
  out.detail = "max/min over theta at xi = " + fmt17(p.at("xi_factor")) + " T_est: " +
               fmt17(seq.front().second) + " -> " + fmt17(seq.back().second) +
               (decreasing ? ", nonincreasing" : ", not monotone");
}

void check_cusp_comparison(const RunData& r, const Params& p, CheckResult& out) {
  if (r.comparison.empty()) {
    out.verdict = Verdict::Flag;
    out.detail = "comparison.csv missing";
    return;
  }
  double worst = -HUGE_VAL, worst_c = -HUGE_VAL;
  out.plot.columns = {"t", "bound", "discrete_excess", "continuum_excess"};
  for (const auto& c : r.comparison) {
    worst = std::max(worst, c.excess);
    worst_c = std::max(worst_c, c.continuum_excess);
    out.plot.rows.push_back({c.t, 0.0, c.excess, c.continuum_excess});
  }
  out.measured["max_excess"] = worst;
  out.measured["max_continuum_excess"] = worst_c;
  out.measured["offset_A"] = r.cusp_offset;
  out.measured["zeta_shift"] = r.zeta_shift;
  out.verdict = pass_if(worst <= p.at("tol"));
  out.detail = "max of v - (t + A) e^{w~} = " + fmt17(worst) + " (continuum cusp " +
               fmt17(worst_c) + ")";
}

void check_harnack(const RunData& r, const Params& p, CheckResult& out) {
  if (r.frames.size() < 2) {
    out.verdict = Verdict::Flag;
    out.detail = "fewer than two frames";
    return;
  }
  const double E = 1.0 + 2.0 / r.T_est;
  std::vector<diag::HarnackSample> samples;
  try {
    const auto pairs =
        diag::harnack_pairs(r.frames, r.T_est, p.at("r_factor") * r.config.datum.rho,
                            static_cast<std::size_t>(p.at("pairs")), r.config.seed);
    samples = diag::harnack_samples(r.frames, pairs, r.T_est);
  } catch (const InsufficientData& e) {
    out.verdict = Verdict::Flag;
    out.detail = e.what();
    return;
  }
  const auto s = diag::harnack_search(samples, r.T_est, E, p.at("tol"));
  out.measured["E"] = E;
  out.measured["pairs"] = static_cast<double>(samples.size());
  out.measured["min_gap"] = s.min_gap;
  out.measured["lattice_size"] = static_cast<double>(s.lattice_size);
  if (s.found) {
    out.measured["C1"] = s.C1;
    out.measured["C2"] = s.C2;
    diag::HarnackConstants k{E, s.C1, s.C2, samples.size()};
    out.plot.columns = {"pair", "t1", "t2", "dist", "gap"};
    for (std::size_t i = 0; i < samples.size(); ++i)
      out.plot.rows.push_back({static_cast<double>(i), samples[i].t1, samples[i].t2,
                               samples[i].dist, diag::harnack_gap(samples[i], r.T_est, k)});
  }
  out.verdict = pass_if(s.found);
  out.detail = s.found ? "gap >= 0 over " + std::to_string(samples.size()) + " pairs at C1 = " +
                             fmt17(s.C1) + ", C2 = " + fmt17(s.C2)
                       : "no lattice (C1, C2) gives a nonnegative gap; best min gap " +
                             fmt17(s.min_gap);
}

using CheckFn = void (*)(const RunData&, const Params&, CheckResult&);

const std::map<std::string, CheckFn>& check_table() {
  static const std::map<std::string, CheckFn> t = {
      {"mass_law", check_mass_law},
      {"rmax_band", check_rmax_band},
      {"origin_curvature", check_origin_curvature},
      {"width_band", check_width_band},
      {"inner_profile", check_inner_profile},
      {"alpha_rate", check_alpha_rate},
      {"xi_front", check_xi_front},
      {"outer_profile", check_outer_profile},
      {"tail_area", check_tail_area},
      {"log_theta_avg", check_log_theta_avg},
      {"aronson_benilan", check_aronson_benilan},
      {"monotonicity", check_monotonicity},
      {"anisotropy", check_anisotropy},
      {"cusp_comparison", check_cusp_comparison},
      {"harnack", check_harnack},
  };
  return t;
}

}  // namespace

Report evaluate_checks(const RunData& run, const std::set<std::string>& only) {
  Report rep;
  rep.run_dir = run.dir;
  rep.config_hash = run.config_hash;
  rep.version = run.version;
  rep.T_est = run.T_est;
  rep.T_est_definition = kTEstDefinition;
  for (const auto& [name, spec] : run.config.checks) {
    if (!only.empty() && !only.count(name)) continue;
    if (only.empty() && !spec.enabled) continue;
    CheckResult res;
    res.name = name;
    if (run.records.empty()) {
      res.detail = "no records";
    } else {
      try {
        check_table().at(name)(run, spec.params, res);
      } catch (const InsufficientData& e) {
        res.verdict = Verdict::Flag;
        res.detail = e.what();
      }
    }
    rep.checks.push_back(std::move(res));
  }
  return rep;
}

std::string render_report(const Report& r) {
  json checks = json::object();
  int n_pass = 0, n_fail = 0, n_flag = 0;
  for (const auto& c : r.checks) {
    json m = json::object();
    for (const auto& [k, v] : c.measured) m[k] = v;
    checks[c.name] = {{"verdict", to_string(c.verdict)}, {"detail", c.detail}, {"measured", m}};
    (c.verdict == Verdict::Pass ? n_pass : c.verdict == Verdict::Fail ? n_fail : n_flag)++;
  }
  json j = {{"header",
             {{"run_dir", r.run_dir},
              {"config_hash", r.config_hash},
              {"version", r.version},
              {"T_est", r.T_est},
              {"T_est_definition", r.T_est_definition}}},
            {"checks", checks},
            {"summary", {{"pass", n_pass}, {"fail", n_fail}, {"flag", n_flag}}}};
  return j.dump(2) + "\n";
}

std::set<std::string> parse_check_list(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (!check_table().count(item)) throw ConfigError("--checks: unknown check '" + item + "'");
    out.insert(item);
  }
  return out;
}

int cmd_report(const std::string& dir, const std::set<std::string>& only, std::ostream& out) {
  RunData run;
  try {
    run = load_run_dir(dir);
  } catch (const ParseError& e) {
    out << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    out << "error: " << e.what() << '\n';
    return kIoError;
  }
  const Report rep = evaluate_checks(run, only);
  try {
    const fs::path base(dir);
    fs::create_directories(base / "report");
    {
      auto os = open_out(base / "report.json");
      os << render_report(rep);
    }
    for (const auto& c : rep.checks) {
      if (c.plot.columns.empty()) continue;
      auto os = open_out(base / "report" / (c.name + ".csv"));
      for (std::size_t k = 0; k < c.plot.columns.size(); ++k)
        os << (k ? "," : "") << c.plot.columns[k];
      os << '\n';
      for (const auto& row : c.plot.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << fmt17(row[k]);
        os << '\n';
      }
    }
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return kIoError;
  }
  out << "run " << dir << "  version " << rep.version << "  config " << rep.config_hash << '\n';
  out << "T_est = " << fmt17(rep.T_est) << '\n' << rep.T_est_definition << '\n';
  char line[64];
  for (const auto& c : rep.checks) {
    std::snprintf(line, sizeof line, "%-18s %-5s ", c.name.c_str(), to_string(c.verdict).c_str());
    out << line << c.detail << '\n';
  }
  return rep.any_failed() ? kCheckFailure : kOk;
}

}  // namespace ricci2d::app
