#pragma once

#include <filesystem>
#include <memory>

#include "nlsgi/fourier.hpp"
#include "nlsgi/grid.hpp"

namespace nlsgi {

enum class Side { plus, minus };

struct PaddingPolicy {
  double min_factor = 2.0;  // padded length >= min_factor * M
  // when > 0 the padded z-extent must also resolve the dual variable 2x,
  // i.e. P dz >= pi / spatial_spacing
  double spatial_spacing = 0.0;
  double taper_fraction = 0.1;  // cosine taper applied to non-decaying input
  double decay_tol = 1e-8;  // relative size allowed on the outer taper band
};

// The spectral grid embedded in a longer periodic grid with the same spacing.
// Projectors act on that extended grid; M-grid inputs are zero-extended.
class ProjectorPlan {
 public:
  ProjectorPlan(const SpectralGrid& zgrid, const PaddingPolicy& policy = {});

  const SpectralGrid& zgrid() const { return zgrid_; }
  const PaddingPolicy& policy() const { return policy_; }
  Index padded_length() const { return P_; }
  Index offset() const { return offset_; }  // extended index of z-node 0
  double spacing() const { return zgrid_.spacing(); }
  double node(Index j) const { return zgrid_.node(0) + static_cast<double>(j - offset_) * spacing(); }
  const RArray& nodes() const { return nodes_; }
  // e^{-i pi j / P}: shifts frequencies by half a bin so no mode sits at zero
  const CArray& twiddle() const { return twiddle_; }

  CArray embed(const CArray& f) const;  // M -> P (zero outside)
  CArray restrict(const CArray& f) const;  // P -> M
  // accepts either length and returns the extended representation
  CArray extend(const CArray& f) const;

 private:
  SpectralGrid zgrid_;
  PaddingPolicy policy_;
  Index P_ = 0, offset_ = 0;
  RArray nodes_;
  CArray twiddle_;
};

// smallest even 2^a 3^b 5^c >= n
Index smooth_length(Index n);

// Per-thread scratch; the plan itself is never mutated.
class ProjectorWorkspace {
 public:
  explicit ProjectorWorkspace(const ProjectorPlan& plan);
  // out = P^{side} f on the extended grid (f of extended length, no checks)
  void apply(const CArray& f, Side side, CArray& out);
  // out = H f with P+ + P- = -iH
  void hilbert(const CArray& f, CArray& out);

 private:
  const ProjectorPlan* plan_;
  Fft fft_;
  CArray buf_, spec_;
};

struct ProjectorDiagnostics {
  bool windowed = false;
  double edge_ratio = 0.0;  // max |f| on the taper band over max |f|
};

// Checked entry points. Inputs of length M or P; output has length P.
// Non-decaying length-M input is tapered and flagged in diag; length-P input is
// taken as is (edge_ratio still reported).
CArray projector(const CArray& f, Side side, const ProjectorPlan& plan, ProjectorDiagnostics* diag = nullptr);
CArray hilbert(const CArray& f, const ProjectorPlan& plan, ProjectorDiagnostics* diag = nullptr);

struct CauchyDiagnostics {
  bool near_axis = false;  // |Im z| < dz
};

// (1 / 2 pi i) sum f(s) / (s - z) ds over the extended grid
Complex cauchy_offaxis(const CArray& f, Complex z, const ProjectorPlan& plan, CauchyDiagnostics* diag = nullptr);

struct DeltaSet {
  CArray delta_plus, delta_minus;  // extended grid
  RArray log_integrand;  // log(1 + conj(r+) r-), extended grid
  double modulus_err = 0.0;  // max ||delta+ delta-| - 1|
  double jump_residual = 0.0;  // max |delta+ - delta- - conj(r+) r- delta-|
};

// r+, r- of length M or P
DeltaSet delta_solve(const CArray& rp, const CArray& rm, const ProjectorPlan& plan);

void write_delta_csv(const std::filesystem::path& path, const DeltaSet& d, const ProjectorPlan& plan);

}  // namespace nlsgi
