#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsgi/rh_solver.hpp"

namespace nlsgi {

// Prefactors of the two reconstruction displays, fixed against the Born
// limit: u(x) = kPotentialFactor * int conj(r+) e^{-2i(z+1)x} xi^(1) dz and
// conj(w)(x) = kConjWFactor * int r- e^{2i(z+1)x} eta^(2) dz (delta twins for x < 0).
struct ReconstructionCalibration {
  Complex potential_factor;
  Complex conj_w_factor;
};
inline constexpr ReconstructionCalibration calibration{Complex(-2.0 / pi, 0.0), Complex(1.0 / pi, 0.0)};

Complex reconstruct_point_positive(double x, const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan);
Complex reconstruct_point_negative(double x, const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan);

// conj(w) from the second display at the state's x
Complex conj_w_from_state(const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan);

// |conj(w) from the RH state - conj(w) of u_rec at grid node j|, u_rec on the whole grid
double w_residual(const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan, const CArray& u_rec,
                  const SpatialGrid& grid, Index j);

struct ReconstructionOptions {
  RHOptions rh;
  int threads = 1;
  double seam_tol = 1e-3;
};

struct ReconstructionResult {
  SpatialGrid grid;
  CArray u_rec;
  RArray w_residual;
  double seam_gap = 0.0;
  NormReport norms;
  std::vector<int> iterations;  // per x node
  double max_rh_residual = 0.0;
  int krylov_count = 0;
  RHOptions rh;
  double seam_tol = 0.0;
};

// Solves at the selected grid nodes only; entries are (x node index, u).
// Positive branch for x >= 0, delta branch for x < 0.
struct PointSample {
  Index j;
  Complex u;
  Complex conj_w;
  int iterations;
  double residual;
  bool krylov;
};
std::vector<PointSample> reconstruct_nodes(const ReflectionSet& refl, const ProjectorPlan& plan, const SpatialGrid& grid,
                                           const std::vector<Index>& nodes, const ReconstructionOptions& opts = {});

// deltas may be null: they are then computed from s
ReconstructionResult reconstruct_field(const ScatteringData& s, const DeltaSet* deltas, const SpatialGrid& grid,
                                       const ProjectorPlan& plan, const ReconstructionOptions& opts = {});

// u(0-) extrapolated by the cubic through the four nodes left of 0, compared with u(0)
double seam_gap(const CArray& u, const SpatialGrid& grid);

}  // namespace nlsgi
