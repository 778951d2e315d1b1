#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlsgi/evolution.hpp"

namespace nlsgi {

struct RunConfig {
  double L = 20.0;
  Index N = 2048;
  double Z = 40.0;
  Index M = 4096;
  std::string potential = "sech:A=0.3,x0=0,phase=0";
  double boundary_tol = default_boundary_tol;
  int stepper_order = 4;
  double rh_tol = 1e-10;
  int max_iter = 200;
  double gate_tol = default_gate_tol;
  double seam_tol = 1e-3;
  double pad_factor = 2.0;
  EvolutionConfig evolution;
  std::string suite = "all";
  std::string archive;  // scattering archive consumed by invert
  std::string output_dir = "nlsgi_out";
  int threads = 0;  // 0: not set here
  std::uint64_t seed = 20240601;
};

// key = value lines, '#' starts a comment; unknown keys are errors
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
void validate(const RunConfig& cfg);

// canonical key = value form; parse_config_text(normalized(c)) == c
std::string normalized(const RunConfig& cfg);
// FNV-1a of the normalized text, hex
std::string config_hash(const RunConfig& cfg);

// derived solver settings
SpatialGrid spatial_grid(const RunConfig& cfg);
SpectralGrid spectral_grid(const RunConfig& cfg);
PaddingPolicy padding_policy(const RunConfig& cfg);
ScatteringOptions scattering_options(const RunConfig& cfg, int threads);
ReconstructionOptions reconstruction_options(const RunConfig& cfg, int threads);

}  // namespace nlsgi
