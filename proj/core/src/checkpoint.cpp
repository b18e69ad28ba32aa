#include "ricci2d/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "ricci2d/errors.hpp"

namespace ricci2d {

namespace {

constexpr const char* kMagic = "RICCI2D-CHECKPOINT 1";

void put_doubles(std::ostream& os, std::span<const double> v) {
  std::vector<unsigned char> buf(v.size() * 8);
  for (std::size_t k = 0; k < v.size(); ++k) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v[k]);
    for (int b = 0; b < 8; ++b) buf[k * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void get_doubles(std::istream& is, std::span<double> v, const std::string& path) {
  std::vector<unsigned char> buf(v.size() * 8);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size())
    throw IoError("checkpoint '" + path + "': truncated binary block");
  for (std::size_t k = 0; k < v.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[k * 8 + b]) << (8 * b);
    v[k] = std::bit_cast<double>(bits);
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_checkpoint(const std::string& path, const FlowState& s, const std::string& hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint '" + path + "' for writing");
  nlohmann::json h;
  h["zeta"] = std::vector<double>(s.grid.zeta().begin(), s.grid.zeta().end());
  h["zeta_split"] = s.grid.zeta_split();
  h["n_theta"] = s.grid.n_theta();
  h["t"] = s.t;
  h["step_index"] = s.step_index;
  h["last_dt"] = s.last_dt;
  h["has_increment"] = !s.increment.empty();
  h["config_hash"] = hash;
  h["encoding"] = "f64le";
  os << kMagic << '\n' << h.dump() << '\n';
  put_doubles(os, s.w.values());
  if (!s.increment.empty()) put_doubles(os, s.increment.values());
  if (!os) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  std::string magic, header;
  if (!std::getline(is, magic) || magic != kMagic)
    throw IoError("checkpoint '" + path + "': bad magic line");
  if (!std::getline(is, header)) throw IoError("checkpoint '" + path + "': missing header");
  Checkpoint c;
  try {
    const auto h = nlohmann::json::parse(header);
    c.state.grid = CylGrid::from_nodes(h.at("zeta").get<std::vector<double>>(),
                                       h.at("n_theta").get<int>(), h.at("zeta_split").get<double>());
    c.state.t = h.at("t").get<double>();
    c.state.step_index = h.at("step_index").get<long>();
    c.state.last_dt = h.at("last_dt").get<double>();
    c.config_hash = h.at("config_hash").get<std::string>();
    c.state.w = LogField(c.state.grid);
    get_doubles(is, c.state.w.values(), path);
    if (h.at("has_increment").get<bool>()) {
      c.state.increment = NodeField(c.state.grid);
      get_doubles(is, c.state.increment.values(), path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint '" + path + "': bad header: " + e.what());
  }
  return c;
}

}  // namespace ricci2d
