#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlsgi/types.hpp"

namespace nlsgi {

struct SpatialGrid {
  double half_width = 20.0;
  Index count = 2048;

  double spacing() const { return 2.0 * half_width / static_cast<double>(count); }
  double node(Index j) const { return -half_width + static_cast<double>(j) * spacing(); }
  // x = 0 sits exactly on a node because count is even
  Index origin_index() const { return count / 2; }
  RArray nodes() const;
};

// z_m = -Z + (m + 1/2) dz, so z = 0 is never a node.
struct SpectralGrid {
  double half_width = 40.0;
  Index count = 4096;

  double spacing() const { return 2.0 * half_width / static_cast<double>(count); }
  double node(Index m) const { return -half_width + (static_cast<double>(m) + 0.5) * spacing(); }
  RArray nodes() const;
  // k = sqrt(z) for z > 0, k = i sqrt(-z) for z < 0
  CArray branch() const;
};

Complex branch_k(double z);

std::pair<SpatialGrid, SpectralGrid> make_grids(double L, Index N, double Z, Index M);
void validate(const SpatialGrid& g);
void validate(const SpectralGrid& g);

struct PotentialField {
  SpatialGrid grid;
  CArray u;
  CArray w;
  double boundary_max = 0.0;  // max |u| over the two end nodes
  bool decay_ok = true;
  std::vector<std::string> warnings;
};

struct SechPreset {
  double amplitude = 0.3;
  double center = 0.0;
  double phase = 0.0;
};
struct GaussianPreset {
  double amplitude = 1.0;
  double sigma = 1.0;
};
struct ZeroPreset {};
using PotentialSpec = std::variant<SechPreset, GaussianPreset, ZeroPreset, std::filesystem::path>;

// "sech:A=0.3,x0=0,phase=0", "gaussian:A=1,sigma=1", "zero", anything else is a CSV path
PotentialSpec parse_potential_spec(const std::string& text);
std::string to_string(const PotentialSpec& spec);

inline constexpr double default_boundary_tol = 1e-10;

PotentialField sample_potential(const PotentialSpec& spec, const SpatialGrid& grid,
                                double boundary_tol = default_boundary_tol);
// builds the field (w, decay check) from samples already on the grid
PotentialField make_field(const SpatialGrid& grid, CArray u, double boundary_tol = default_boundary_tol);

// w = -i u_x + 2u - |u|^2 u / 2 with a spectral u_x
CArray compute_w(const CArray& u, const SpatialGrid& grid);

struct NormReport {
  double L1 = 0, L2 = 0, L21 = 0, H1 = 0, H2 = 0, H11 = 0;
  // the pair used by the stability estimates
  double h2_h11() const { return H2 + H11; }
};

NormReport norms(const PotentialField& u);
NormReport norms(const CArray& u, const SpatialGrid& grid);

// H^1 + L^{2,1} norm of a decaying function sampled on the spectral grid
double h1_l21_norm(const CArray& f, const SpectralGrid& grid);

// trapezoid on periodic samples
inline double l2_norm(const CArray& f, double h) { return std::sqrt(f.abs2().sum() * h); }

}  // namespace nlsgi
