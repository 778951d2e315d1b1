#include "nlsgi/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nlsgi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0;
  std::string s = v;
  if (!s.empty() && s[0] == '+') s.erase(0, 1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(out))
    throw InputError("expected a real number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  std::string s = v;
  if (!s.empty() && s[0] == '+') s.erase(0, 1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw InputError("expected an integer, got '" + v + "'");
  return out;
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(item));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s = {
      {"L", [](RunConfig& c, const std::string& v) { c.L = to_double(v); }},
      {"N", [](RunConfig& c, const std::string& v) { c.N = to_int(v); }},
      {"Z", [](RunConfig& c, const std::string& v) { c.Z = to_double(v); }},
      {"M", [](RunConfig& c, const std::string& v) { c.M = to_int(v); }},
      {"potential", [](RunConfig& c, const std::string& v) { c.potential = v; }},
      {"boundary_tol", [](RunConfig& c, const std::string& v) { c.boundary_tol = to_double(v); }},
      {"stepper_order", [](RunConfig& c, const std::string& v) { c.stepper_order = static_cast<int>(to_int(v)); }},
      {"rh_tol", [](RunConfig& c, const std::string& v) { c.rh_tol = to_double(v); }},
      {"max_iter", [](RunConfig& c, const std::string& v) { c.max_iter = static_cast<int>(to_int(v)); }},
      {"gate_tol", [](RunConfig& c, const std::string& v) { c.gate_tol = to_double(v); }},
      {"seam_tol", [](RunConfig& c, const std::string& v) { c.seam_tol = to_double(v); }},
      {"pad_factor", [](RunConfig& c, const std::string& v) { c.pad_factor = to_double(v); }},
      {"t_final", [](RunConfig& c, const std::string& v) { c.evolution.t_final = to_double(v); }},
      {"phase_coefficient", [](RunConfig& c, const std::string& v) { c.evolution.phase_coefficient = to_double(v); }},
      {"phase_sign", [](RunConfig& c, const std::string& v) { c.evolution.phase_sign = static_cast<int>(to_int(v)); }},
      {"dt", [](RunConfig& c, const std::string& v) { c.evolution.dt = to_double(v); }},
      {"c_stab", [](RunConfig& c, const std::string& v) { c.evolution.c_stab = to_double(v); }},
      {"snapshots", [](RunConfig& c, const std::string& v) { c.evolution.snapshot_times = to_list(v); }},
      {"suite", [](RunConfig& c, const std::string& v) { c.suite = v; }},
      {"archive", [](RunConfig& c, const std::string& v) { c.archive = v; }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(to_int(v)); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(to_int(v)); }},
  };
  return s;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  // line of the assignment after which the config last turned invalid
  int blame = 0;
  bool was_valid = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw InputError(where + "unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const InputError& e) {
      throw InputError(where + key + ": " + e.what());
    }
    bool valid = true;
    try {
      validate(cfg);
    } catch (const InputError&) {
      valid = false;
    }
    if (was_valid && !valid) blame = lineno;
    was_valid = valid;
  }
  try {
    validate(cfg);
  } catch (const InputError& e) {
    throw InputError(origin + ":" + std::to_string(blame) + ": " + e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void validate(const RunConfig& c) {
  make_grids(c.L, c.N, c.Z, c.M);
  parse_potential_spec(c.potential);
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw InputError(std::string(name) + " must be > 0");
  };
  positive(c.boundary_tol, "boundary_tol");
  positive(c.rh_tol, "rh_tol");
  positive(c.gate_tol, "gate_tol");
  positive(c.seam_tol, "seam_tol");
  if (c.stepper_order != 2 && c.stepper_order != 4) throw InputError("stepper_order must be 2 or 4");
  if (c.max_iter < 1) throw InputError("max_iter must be >= 1");
  if (!(c.pad_factor >= 2)) throw InputError("pad_factor must be >= 2");
  if (c.threads < 0) throw InputError("threads must be >= 0");
  validate(c.evolution);
}

std::string normalized(const RunConfig& c) {
  std::ostringstream os;
  std::string snaps;
  for (size_t i = 0; i < c.evolution.snapshot_times.size(); ++i)
    snaps += (i ? "," : "") + fmt(c.evolution.snapshot_times[i]);
  os << "L = " << fmt(c.L) << '\n'
     << "N = " << c.N << '\n'
     << "Z = " << fmt(c.Z) << '\n'
     << "M = " << c.M << '\n'
     << "potential = " << c.potential << '\n'
     << "boundary_tol = " << fmt(c.boundary_tol) << '\n'
     << "stepper_order = " << c.stepper_order << '\n'
     << "rh_tol = " << fmt(c.rh_tol) << '\n'
     << "max_iter = " << c.max_iter << '\n'
     << "gate_tol = " << fmt(c.gate_tol) << '\n'
     << "seam_tol = " << fmt(c.seam_tol) << '\n'
     << "pad_factor = " << fmt(c.pad_factor) << '\n'
     << "t_final = " << fmt(c.evolution.t_final) << '\n'
     << "phase_coefficient = " << fmt(c.evolution.phase_coefficient) << '\n'
     << "phase_sign = " << c.evolution.phase_sign << '\n'
     << "dt = " << fmt(c.evolution.dt) << '\n'
     << "c_stab = " << fmt(c.evolution.c_stab) << '\n'
     << "snapshots = " << snaps << '\n'
     << "suite = " << c.suite << '\n'
     << "archive = " << c.archive << '\n'
     << "output_dir = " << c.output_dir << '\n'
     << "threads = " << c.threads << '\n'
     << "seed = " << c.seed << '\n';
  return os.str();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : normalized(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

SpatialGrid spatial_grid(const RunConfig& c) { return make_grids(c.L, c.N, c.Z, c.M).first; }
SpectralGrid spectral_grid(const RunConfig& c) { return make_grids(c.L, c.N, c.Z, c.M).second; }

PaddingPolicy padding_policy(const RunConfig& c) {
  PaddingPolicy p;
  p.min_factor = c.pad_factor;
  p.spatial_spacing = spatial_grid(c).spacing();
  return p;
}

ScatteringOptions scattering_options(const RunConfig& c, int threads) {
  ScatteringOptions o;
  o.jost.order = c.stepper_order == 2 ? StepperOrder::second : StepperOrder::fourth;
  o.jost.threads = threads;
  return o;
}

ReconstructionOptions reconstruction_options(const RunConfig& c, int threads) {
  ReconstructionOptions o;
  o.rh.tol = c.rh_tol;
  o.rh.max_iter = c.max_iter;
  o.threads = threads;
  o.seam_tol = c.seam_tol;
  return o;
}

}  // namespace nlsgi
