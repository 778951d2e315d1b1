#pragma once

#include <filesystem>

#include "nlsgi/cauchy_projector.hpp"
#include "nlsgi/direct_scattering.hpp"

namespace nlsgi {

// r+, r- (and their delta-modified versions) on the extended grid, shared by
// every x solve.
struct ReflectionSet {
  CArray rp, rm;
  CArray rp_delta, rm_delta;  // empty unless deltas were supplied
};

// r+-,delta = conj(delta+ delta-) r+-
ReflectionSet make_reflection_set(const ScatteringData& s, const ProjectorPlan& plan, const DeltaSet* deltas = nullptr);

// R(x; z) entries on the extended grid. Plain: [[conj(r+) r-, conj(r+) e^-], [r- e^+, 0]];
// delta-modified (x < 0): [[0, conj(r+d) e^-], [r-d e^+, conj(r+d) r-d]], e^+- = e^{+-2i(z+1)x}.
struct JumpData {
  double x = 0.0;
  bool delta_modified = false;
  CArray r11, r12, r21, r22;
};

JumpData build_jump(double x, const ScatteringData& s, const ProjectorPlan& plan, const DeltaSet* deltas = nullptr);
JumpData build_jump(double x, const ReflectionSet& refl, const ProjectorPlan& plan);

enum class Branch { positive_x, negative_x };

struct RHOptions {
  double tol = 1e-10;  // discrete 2-norm over z
  int max_iter = 200;
  double krylov_switch = 0.9;  // contraction estimate that triggers GMRES
  int restart = 40;
};

// First column xi = (xi1, xi2), second column eta = (eta1, eta2), extended grid.
// positive_x: xi = e1 + P-(r- e^+ eta), eta = e2 + P+(conj(r+) e^- xi)
// negative_x: xi = e1 + P+(r-d e^+ eta), eta = e2 + P-(conj(r+d) e^- xi)
struct RHSolveState {
  Branch branch = Branch::positive_x;
  double x = 0.0;
  CArray xi1, xi2, eta1, eta2;
  int iterations = 0;
  double residual = 0.0;
  double contraction = 0.0;
  bool used_krylov = false;
};

RHSolveState solve_rh_positive(double x, const ReflectionSet& refl, const ProjectorPlan& plan,
                               ProjectorWorkspace& ws, const RHOptions& opts = {});
RHSolveState solve_rh_negative(double x, const ReflectionSet& refl, const ProjectorPlan& plan,
                               ProjectorWorkspace& ws, const RHOptions& opts = {});

// convenience overloads with their own workspace
RHSolveState solve_rh_positive(double x, const ScatteringData& s, const ProjectorPlan& plan, const RHOptions& opts = {});
RHSolveState solve_rh_negative(double x, const ScatteringData& s, const DeltaSet& deltas, const ProjectorPlan& plan,
                               const RHOptions& opts = {});

// residual of both projection equations, recomputed from scratch
double rh_residual(const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan, ProjectorWorkspace& ws);

// || M - I ||_2 over the extended grid
double deviation_norm(const RHSolveState& st, const ProjectorPlan& plan);

void write_rh_debug_csv(const std::filesystem::path& path, const RHSolveState& st, const ProjectorPlan& plan);

}  // namespace nlsgi
