#pragma once

#include <cstdint>
#include <string>

#include "ricci2d/grid.hpp"

namespace ricci2d {

// Text header (one JSON line after a magic line) followed by little-endian
// IEEE-754 doubles: w row-major (zeta outer, theta inner), then the last
// increment when present. Round trips are bit-exact.
void write_checkpoint(const std::string& path, const FlowState& state,
                      const std::string& config_hash = "");

struct Checkpoint {
  FlowState state;
  std::string config_hash;
};

Checkpoint read_checkpoint(const std::string& path);

// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace ricci2d
