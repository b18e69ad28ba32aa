#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ricci2d/grid.hpp"
#include "ricci2d/rescale.hpp"
#include "ricci2d/solver.hpp"

namespace ricci2d::app {

struct OutputSpec {
  std::string dir = "run";
  int record_stride = 10;
  rescale::SnapshotGrids grids;
  std::size_t mono_pairs = 256;
  // Write a checkpoint at every scheduled tau (needed by the Harnack check).
  bool frames = true;

  bool operator==(const OutputSpec&) const = default;
};

struct CheckSpec {
  bool enabled = true;
  std::map<std::string, double> params;

  bool operator==(const CheckSpec&) const = default;
};

using CheckSet = std::map<std::string, CheckSpec>;

struct ExperimentConfig {
  solver::InitialDatum datum;
  GridSpec grid;
  solver::SteppingPolicy policy;
  OutputSpec outputs;
  CheckSet checks;
  std::uint64_t seed = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

// Every known check with its default parameters.
CheckSet default_checks();

ExperimentConfig default_config();

// Parses a JSON experiment description. Missing keys take defaults; unknown keys
// and out-of-range values throw ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text);

// Canonical rendering: every field explicit, keys sorted.
std::string render_config(const ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);

}  // namespace ricci2d::app
