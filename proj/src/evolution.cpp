#include "nlsgi/evolution.hpp"

#include <algorithm>
#include <sstream>

#include "nlsgi/fourier.hpp"

namespace nlsgi {

void validate(const EvolutionConfig& cfg) {
  if (!(cfg.t_final >= 0) || !std::isfinite(cfg.t_final)) throw InputError("t_final must be >= 0");
  if (cfg.phase_coefficient != 2.0 && cfg.phase_coefficient != 4.0) throw InputError("phase_coefficient must be 2 or 4");
  if (cfg.phase_sign != 1 && cfg.phase_sign != -1) throw InputError("phase_sign must be +1 or -1");
  if (cfg.dt < 0 || !std::isfinite(cfg.dt)) throw InputError("dt must be >= 0 (0 selects the stability bound)");
  if (!(cfg.c_stab > 0)) throw InputError("c_stab must be positive");
  for (double t : cfg.snapshot_times)
    if (!(t >= 0 && t <= cfg.t_final)) throw InputError("snapshot times must lie in [0, t_final]");
}

ScatteringData evolve_reflection(const ScatteringData& s, double t, const EvolutionConfig& cfg) {
  ScatteringData out = s;
  const RArray z = s.zgrid.nodes();
  CArray ph(z.size());
  for (Index m = 0; m < z.size(); ++m) {
    const double l = z[m] + 1.0;
    ph[m] = std::polar(1.0, cfg.phase_sign * cfg.phase_coefficient * l * l * t);
  }
  out.b = s.b * ph;
  out.r = s.r * ph;
  out.rp = s.rp * ph;
  out.rm = s.rm * ph;
  return out;
}

IstResult ist_solve(const ScatteringData& initial, double t, const EvolutionConfig& cfg, const SpatialGrid& grid,
                    const ProjectorPlan& plan, const IstOptions& opts) {
  check_gate(initial, opts.gate_tol);
  IstResult r;
  r.initial = initial;
  r.evolved = evolve_reflection(initial, t, cfg);
  r.deltas = delta_solve(r.evolved.rp, r.evolved.rm, plan);
  r.field = reconstruct_field(r.evolved, &r.deltas, grid, plan, opts.reconstruction);
  return r;
}

IstResult ist_solve(const PotentialField& u0, double t, const EvolutionConfig& cfg, const SpectralGrid& zgrid,
                    const ProjectorPlan& plan, const IstOptions& opts) {
  return ist_solve(compute_scattering(u0, zgrid, opts.scattering), t, cfg, u0.grid, plan, opts);
}

CArray nls_gi_nonlinear(const CArray& u, double dx) {
  const CArray ux = spectral_derivative(u, dx, 1);
  const CArray a2 = u.abs2().cast<Complex>();
  return -2.0 * I * a2 * u + u * u * ux.conjugate() + 0.5 * I * a2 * a2 * u;
}

namespace {

class IfRk4 {
 public:
  IfRk4(const SpatialGrid& g) : n_(g.count), dx_(g.spacing()), fft_(g.count) {
    const RArray k = fft_wavenumbers(n_, dx_);
    kk_ = k * k;
    ik_ = I * k.cast<Complex>();
  }

  // nonlinear term in Fourier space
  CArray N(const CArray& U) {
    fft_.inverse(U, u_);
    tmp_ = U * ik_;
    fft_.inverse(tmp_, ux_);
    const CArray a2 = u_.abs2().cast<Complex>();
    tmp_ = -2.0 * I * a2 * u_ + u_ * u_ * ux_.conjugate() + 0.5 * I * a2 * a2 * u_;
    CArray out;
    fft_.forward(tmp_, out);
    return out;
  }

  void set_dt(double dt) {
    if (dt == dt_) return;
    dt_ = dt;
    E_.resize(n_);
    E2_.resize(n_);
    for (Index m = 0; m < n_; ++m) {
      E_[m] = std::polar(1.0, -kk_[m] * dt / 2.0);
      E2_[m] = std::polar(1.0, -kk_[m] * dt);
    }
  }

  void step(CArray& U) {
    const double dt = dt_;
    const CArray k1 = N(U);
    const CArray k2 = N(E_ * (U + 0.5 * dt * k1));
    const CArray k3 = N(E_ * U + 0.5 * dt * k2);
    const CArray k4 = N(E2_ * U + dt * E_ * k3);
    U = E2_ * U + dt / 6.0 * (E2_ * k1 + 2.0 * E_ * (k2 + k3) + k4);
  }

  Fft& fft() { return fft_; }

 private:
  Index n_;
  double dx_, dt_ = -1.0;
  Fft fft_;
  RArray kk_;
  CArray ik_, E_, E2_, u_, ux_, tmp_;
};

}  // namespace

ReferenceState reference_solve(const PotentialField& u0, double t, const EvolutionConfig& cfg) {
  validate(cfg);
  if (!(t >= 0)) throw InputError("reference_solve needs t >= 0");
  const SpatialGrid& g = u0.grid;
  const double dx = g.spacing();
  const double bound = cfg.c_stab * dx * dx;
  if (cfg.dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "unstable time step: dt = " << cfg.dt << " exceeds c_stab dx^2 = " << bound << " (c_stab = " << cfg.c_stab
       << ", dx = " << dx << ")";
    throw StabilityError(os.str());
  }
  const double dt_max = cfg.dt > 0 ? cfg.dt : bound;

  std::vector<double> times = cfg.snapshot_times;
  times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  times.erase(std::remove_if(times.begin(), times.end(), [&](double s) { return s > t; }), times.end());

  ReferenceState st;
  st.grid = g;
  st.mass0 = mass(u0.u, dx);
  IfRk4 rk(g);
  CArray U;
  rk.fft().forward(u0.u, U);
  double now = 0.0, sup_prev = u0.u.abs().maxCoeff();
  for (double target : times) {
    const double span = target - now;
    if (span > 0) {
      const long n = static_cast<long>(std::ceil(span / dt_max - 1e-9));
      rk.set_dt(span / static_cast<double>(n));
      st.dt = std::max(st.dt, span / static_cast<double>(n));
      for (long i = 0; i < n; ++i) {
        rk.step(U);
        ++st.steps;
      }
    }
    now = target;
    CArray u;
    rk.fft().inverse(U, u);
    const double sup = u.abs().maxCoeff();
    if (!std::isfinite(sup) || (sup_prev > 0 && sup > 10.0 * sup_prev)) {
      std::ostringstream os;
      os << "reference solver unstable: sup|u| grew from " << sup_prev << " to " << sup << " by t = " << now
         << " (dt = " << st.dt << ")";
      throw NumericalError(os.str());
    }
    sup_prev = std::max(sup, 1e-300);
    st.mass_drift = std::max(st.mass_drift, std::abs(mass(u, dx) - st.mass0));
    st.snapshots.push_back({now, u});
  }
  st.t = now;
  st.u = st.snapshots.back().u;
  st.mass = mass(st.u, dx);
  return st;
}

}  // namespace nlsgi
