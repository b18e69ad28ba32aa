#include "ricci2d/config.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "ricci2d/errors.hpp"

namespace ricci2d::app {

using nlohmann::json;

CheckSet default_checks() {
  auto make = [](std::map<std::string, double> p) { return CheckSpec{true, std::move(p)}; };
  return {
      {"mass_law", make({{"tol", 0.01}})},
      {"rmax_band", make({{"lo", 1.0}, {"hi", 6.0}, {"tau_lo", 10.0}, {"tau_hi", 50.0}})},
      {"origin_curvature", make({{"tol", 0.15}, {"tau", 50.0}})},
      {"width_band",
       make({{"lo", 0.5}, {"hi", 2.0}, {"tau_lo", 10.0}, {"tau_hi", 50.0}, {"rate_slack", 1e-3}})},
      {"inner_profile", make({{"tol", 0.05}, {"lambda_tol", 0.05}, {"tau", 50.0}, {"y_max", 3.0}})},
      {"alpha_rate", make({{"tol", 0.10}, {"tau", 50.0}})},
      {"xi_front", make({{"tol", 0.10}, {"tau", 50.0}})},
      {"outer_profile", make({{"tol", 0.10},
                              {"tau", 12.0},
                              {"gap", 0.3},
                              {"xi_hi", 3.0},
                              {"collapse_factor", 0.5},
                              {"collapse_max", 0.05}})},
      {"tail_area", make({{"tol", 0.10}, {"tau", 12.0}, {"eta_lo", 1.5}, {"eta_hi", 3.0}})},
      {"log_theta_avg", make({{"tol", 0.10}, {"tau", 12.0}, {"xi_lo", 1.5}, {"xi_hi", 3.0}})},
      {"aronson_benilan", make({{"tol", 1e-3}})},
      {"monotonicity", make({{"tol", 1e-3}})},
      {"anisotropy", make({{"xi_factor", 1.5}, {"max_final", 1.1}, {"slack", 1e-9}})},
      {"cusp_comparison", make({{"tol", 1e-6}})},
      {"harnack", make({{"tol", 1e-6}, {"pairs", 100.0}, {"r_factor", 2.0}})},
  };
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.checks = default_checks();
  return c;
}

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> known) {
  if (!obj.is_object()) fail(where, "must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (known.count(it.key())) continue;
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (it.key() == "gamma")
      fail(key, "unknown key; only the maximal gamma = 2 flow is supported");
    fail(key, "unknown key");
  }
}

double num(const json& obj, const char* name, const std::string& where, double def) {
  if (!obj.contains(name)) return def;
  const json& v = obj.at(name);
  if (!v.is_number()) fail(where + "." + name, "must be a number");
  return v.get<double>();
}

long integer(const json& obj, const char* name, const std::string& where, long def) {
  if (!obj.contains(name)) return def;
  const json& v = obj.at(name);
  if (!v.is_number_integer()) fail(where + "." + name, "must be an integer");
  return v.get<long>();
}

std::vector<double> numlist(const json& obj, const char* name, const std::string& where,
                            std::vector<double> def) {
  if (!obj.contains(name)) return def;
  const json& v = obj.at(name);
  if (!v.is_array()) fail(where + "." + name, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(where + "." + name, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void parse_datum(const json& j, solver::InitialDatum& d) {
  reject_unknown(j, "datum", {"kind", "height", "rho", "offsets", "t0", "floor_eps"});
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) fail("datum.kind", "must be a string");
    d.kind = solver::datum_kind_from_string(j.at("kind").get<std::string>());
  }
  d.height = num(j, "height", "datum", d.height);
  d.rho = num(j, "rho", "datum", d.rho);
  d.t0 = num(j, "t0", "datum", d.t0);
  d.floor_eps = num(j, "floor_eps", "datum", d.kind == solver::DatumKind::Disk ? 1.0 : 0.01);
  d.offsets.clear();
  if (j.contains("offsets")) {
    const json& o = j.at("offsets");
    if (!o.is_array()) fail("datum.offsets", "must be an array of [x, y] pairs");
    for (const auto& p : o) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        fail("datum.offsets", "must be an array of [x, y] pairs");
      d.offsets.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } else if (d.kind == solver::DatumKind::TwoBumps) {
    d.offsets = {{-0.4, 0.0}, {0.4, 0.0}};
  }
}

void parse_grid(const json& j, GridSpec& g) {
  reject_unknown(j, "grid", {"zeta_min", "zeta_split", "zeta_max", "n_zeta", "n_theta", "max_ratio"});
  g.zeta_min = num(j, "zeta_min", "grid", g.zeta_min);
  g.zeta_split = num(j, "zeta_split", "grid", g.zeta_split);
  g.zeta_max = num(j, "zeta_max", "grid", g.zeta_max);
  g.n_zeta = static_cast<int>(integer(j, "n_zeta", "grid", g.n_zeta));
  g.n_theta = static_cast<int>(integer(j, "n_theta", "grid", g.n_theta));
  g.max_ratio = num(j, "max_ratio", "grid", g.max_ratio);
}

void parse_policy(const json& j, solver::SteppingPolicy& p) {
  reject_unknown(j, "policy", {"dt_max", "dt_min", "sigma", "newton_tol", "newton_max_iter",
                               "tau_schedule", "mass_floor"});
  p.dt_max = num(j, "dt_max", "policy", p.dt_max);
  p.dt_min = num(j, "dt_min", "policy", p.dt_min);
  p.sigma = num(j, "sigma", "policy", p.sigma);
  p.newton_tol = num(j, "newton_tol", "policy", p.newton_tol);
  p.newton_max_iter = static_cast<int>(integer(j, "newton_max_iter", "policy", p.newton_max_iter));
  p.tau_schedule = numlist(j, "tau_schedule", "policy", p.tau_schedule);
  p.mass_floor = num(j, "mass_floor", "policy", p.mass_floor);
}

void parse_outputs(const json& j, OutputSpec& o) {
  reject_unknown(j, "outputs", {"dir", "record_stride", "y_max", "n_y", "xi_lo", "xi_hi", "n_xi",
                                "anisotropy_xi", "mono_pairs", "frames"});
  if (j.contains("dir")) {
    if (!j.at("dir").is_string()) fail("outputs.dir", "must be a string");
    o.dir = j.at("dir").get<std::string>();
  }
  if (j.contains("frames")) {
    if (!j.at("frames").is_boolean()) fail("outputs.frames", "must be a boolean");
    o.frames = j.at("frames").get<bool>();
  }
  o.record_stride = static_cast<int>(integer(j, "record_stride", "outputs", o.record_stride));
  o.grids.y_max = num(j, "y_max", "outputs", o.grids.y_max);
  o.grids.n_y = static_cast<int>(integer(j, "n_y", "outputs", o.grids.n_y));
  o.grids.xi_lo = num(j, "xi_lo", "outputs", o.grids.xi_lo);
  o.grids.xi_hi = num(j, "xi_hi", "outputs", o.grids.xi_hi);
  o.grids.n_xi = static_cast<int>(integer(j, "n_xi", "outputs", o.grids.n_xi));
  o.grids.anisotropy_xi = numlist(j, "anisotropy_xi", "outputs", o.grids.anisotropy_xi);
  const long mp = integer(j, "mono_pairs", "outputs", static_cast<long>(o.mono_pairs));
  if (mp < 0) fail("outputs.mono_pairs", "must be >= 0");
  o.mono_pairs = static_cast<std::size_t>(mp);
}

void parse_checks(const json& j, CheckSet& checks) {
  if (!j.is_object()) fail("checks", "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string where = "checks." + it.key();
    auto found = checks.find(it.key());
    if (found == checks.end()) fail(where, "unknown check");
    CheckSpec& spec = found->second;
    if (it->is_boolean()) {
      spec.enabled = it->get<bool>();
      continue;
    }
    if (!it->is_object()) fail(where, "must be a boolean or an object of parameters");
    for (auto p = it->begin(); p != it->end(); ++p) {
      if (p.key() == "enabled") {
        if (!p->is_boolean()) fail(where + ".enabled", "must be a boolean");
        spec.enabled = p->get<bool>();
        continue;
      }
      if (!spec.params.count(p.key())) fail(where + "." + p.key(), "unknown parameter");
      if (!p->is_number()) fail(where + "." + p.key(), "must be a number");
      spec.params[p.key()] = p->get<double>();
    }
  }
}

void validate(const ExperimentConfig& c) {
  solver::validate(c.datum);
  solver::validate(c.policy);
  (void)CylGrid::stretched(c.grid);
  if (c.grid.zeta_split < std::log(c.datum.rho) + 2.0)
    fail("grid.zeta_split", "must be >= log(rho) + 2 to resolve the datum");
  if (c.outputs.record_stride < 1) fail("outputs.record_stride", "must be >= 1");
  const auto& g = c.outputs.grids;
  if (!(g.y_max > 0.0) || g.n_y < 8) fail("outputs.n_y", "need y_max > 0 and n_y >= 8");
  if (!(g.xi_lo > 0.0 && g.xi_hi > g.xi_lo) || g.n_xi < 2)
    fail("outputs.xi_lo", "need 0 < xi_lo < xi_hi and n_xi >= 2");
  if (c.outputs.dir.empty()) fail("outputs.dir", "must not be empty");
  for (const auto& [name, spec] : c.checks)
    for (const auto& [k, v] : spec.params)
      if (!std::isfinite(v) || v < 0.0) fail("checks." + name + "." + k, "must be finite and >= 0");
}

json datum_json(const solver::InitialDatum& d) {
  json offsets = json::array();
  for (const auto& p : d.offsets) offsets.push_back({p.x, p.y});
  return {{"kind", solver::to_string(d.kind)}, {"height", d.height},   {"rho", d.rho},
          {"offsets", offsets},                {"t0", d.t0},           {"floor_eps", d.floor_eps}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "", {"datum", "grid", "policy", "outputs", "checks", "seed"});
  ExperimentConfig c = default_config();
  parse_datum(j.contains("datum") ? j.at("datum") : json::object(), c.datum);
  if (j.contains("grid")) parse_grid(j.at("grid"), c.grid);
  if (j.contains("policy")) parse_policy(j.at("policy"), c.policy);
  if (j.contains("outputs")) parse_outputs(j.at("outputs"), c.outputs);
  if (j.contains("checks")) parse_checks(j.at("checks"), c.checks);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "must be a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  validate(c);
  return c;
}

std::string render_config(const ExperimentConfig& c) {
  json j;
  j["datum"] = datum_json(c.datum);
  j["grid"] = {{"zeta_min", c.grid.zeta_min}, {"zeta_split", c.grid.zeta_split},
               {"zeta_max", c.grid.zeta_max}, {"n_zeta", c.grid.n_zeta},
               {"n_theta", c.grid.n_theta},   {"max_ratio", c.grid.max_ratio}};
  j["policy"] = {{"dt_max", c.policy.dt_max},
                 {"dt_min", c.policy.dt_min},
                 {"sigma", c.policy.sigma},
                 {"newton_tol", c.policy.newton_tol},
                 {"newton_max_iter", c.policy.newton_max_iter},
                 {"tau_schedule", c.policy.tau_schedule},
                 {"mass_floor", c.policy.mass_floor}};
  const auto& g = c.outputs.grids;
  j["outputs"] = {{"dir", c.outputs.dir},     {"record_stride", c.outputs.record_stride},
                  {"y_max", g.y_max},         {"n_y", g.n_y},
                  {"xi_lo", g.xi_lo},         {"xi_hi", g.xi_hi},
                  {"n_xi", g.n_xi},           {"anisotropy_xi", g.anisotropy_xi},
                  {"mono_pairs", c.outputs.mono_pairs}, {"frames", c.outputs.frames}};
  json checks = json::object();
  for (const auto& [name, spec] : c.checks) {
    json o = json::object();
    o["enabled"] = spec.enabled;
    for (const auto& [k, v] : spec.params) o[k] = v;
    checks[name] = o;
  }
  j["checks"] = checks;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace ricci2d::app
