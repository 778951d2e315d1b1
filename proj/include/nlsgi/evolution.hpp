#pragma once

#include <vector>

#include "nlsgi/reconstruction.hpp"

namespace nlsgi {

struct EvolutionConfig {
  double t_final = 0.1;
  // r+-(t) = r+-(0) exp(i * sign * c (z+1)^2 t); c = 4 matches the linear dispersion
  double phase_coefficient = 4.0;
  int phase_sign = +1;
  double dt = 0.0;  // reference solver step; 0 picks c_stab dx^2 (rounded to hit snapshot times)
  double c_stab = 0.2;
  std::vector<double> snapshot_times;  // empty means {t_final}
};

void validate(const EvolutionConfig& cfg);

ScatteringData evolve_reflection(const ScatteringData& s, double t, const EvolutionConfig& cfg);

struct IstOptions {
  ScatteringOptions scattering;
  ReconstructionOptions reconstruction;
  PaddingPolicy padding;
  double gate_tol = default_gate_tol;
};

struct IstResult {
  ScatteringData initial, evolved;
  DeltaSet deltas;
  ReconstructionResult field;
};

// direct scattering -> evolve -> deltas -> reconstruct
IstResult ist_solve(const PotentialField& u0, double t, const EvolutionConfig& cfg, const SpectralGrid& zgrid,
                    const ProjectorPlan& plan, const IstOptions& opts = {});
// reuses scattering data already computed for u0
IstResult ist_solve(const ScatteringData& initial, double t, const EvolutionConfig& cfg, const SpatialGrid& grid,
                    const ProjectorPlan& plan, const IstOptions& opts = {});

struct Snapshot {
  double t;
  CArray u;
};

struct ReferenceState {
  SpatialGrid grid;
  CArray u;
  double t = 0.0;
  double dt = 0.0;
  long steps = 0;
  double mass0 = 0.0, mass = 0.0;
  double mass_drift = 0.0;  // max over recorded times of |mass(t) - mass0|
  std::vector<Snapshot> snapshots;
};

// u_t = i u_xx - 2i|u|^2 u + u^2 conj(u)_x + (i/2)|u|^4 u, integrating-factor RK4
ReferenceState reference_solve(const PotentialField& u0, double t, const EvolutionConfig& cfg);

// nonlinear part of the right-hand side (everything except i u_xx)
CArray nls_gi_nonlinear(const CArray& u, double dx);

inline double mass(const CArray& u, double dx) { return u.abs2().sum() * dx; }

}  // namespace nlsgi
