#include "nlsgi/cauchy_projector.hpp"

#include <fstream>
#include <sstream>

namespace nlsgi {

Index smooth_length(Index n) {
  for (Index p = std::max<Index>(n, 2);; ++p) {
    if (p % 2) continue;
    Index q = p;
    for (Index f : {2, 3, 5})
      while (q % f == 0) q /= f;
    if (q == 1) return p;
  }
}

ProjectorPlan::ProjectorPlan(const SpectralGrid& zgrid, const PaddingPolicy& policy) : zgrid_(zgrid), policy_(policy) {
  validate(zgrid);
  if (!(policy.min_factor >= 2.0)) throw InputError("padding factor must be at least 2");
  const Index M = zgrid.count;
  double target = policy.min_factor * static_cast<double>(M);
  if (policy.spatial_spacing > 0) target = std::max(target, pi / (policy.spatial_spacing * zgrid.spacing()));
  P_ = smooth_length(static_cast<Index>(std::ceil(target - 1e-9)));
  offset_ = (P_ - M) / 2;
  nodes_.resize(P_);
  twiddle_.resize(P_);
  for (Index j = 0; j < P_; ++j) {
    nodes_[j] = node(j);
    twiddle_[j] = std::polar(1.0, -pi * static_cast<double>(j) / static_cast<double>(P_));
  }
}

CArray ProjectorPlan::embed(const CArray& f) const {
  if (f.size() != zgrid_.count) throw InputError("embed expects a spectral-grid array");
  CArray out = CArray::Zero(P_);
  out.segment(offset_, zgrid_.count) = f;
  return out;
}

CArray ProjectorPlan::restrict(const CArray& f) const {
  if (f.size() != P_) throw InputError("restrict expects an extended-grid array");
  return f.segment(offset_, zgrid_.count);
}

CArray ProjectorPlan::extend(const CArray& f) const {
  if (f.size() == P_) return f;
  return embed(f);
}

ProjectorWorkspace::ProjectorWorkspace(const ProjectorPlan& plan)
    : plan_(&plan), fft_(plan.padded_length()), buf_(plan.padded_length()), spec_(plan.padded_length()) {}

void ProjectorWorkspace::apply(const CArray& f, Side side, CArray& out) {
  const Index P = plan_->padded_length(), half = P / 2;
  buf_ = f * plan_->twiddle();
  fft_.forward(buf_, spec_);
  // shifted frequency of bin m is m + 1/2 (m < P/2) or m - P + 1/2: never zero
  if (side == Side::plus)
    spec_.tail(P - half).setZero();
  else {
    spec_.head(half).setZero();
    spec_.tail(P - half) = -spec_.tail(P - half);
  }
  fft_.inverse(spec_, buf_);
  out = buf_ * plan_->twiddle().conjugate();
}

void ProjectorWorkspace::hilbert(const CArray& f, CArray& out) {
  const Index P = plan_->padded_length(), half = P / 2;
  buf_ = f * plan_->twiddle();
  fft_.forward(buf_, spec_);
  // i (P+ + P-) has multiplier +i on the upper half, -i on the lower
  spec_.head(half) *= I;
  spec_.tail(P - half) *= -I;
  fft_.inverse(spec_, buf_);
  out = buf_ * plan_->twiddle().conjugate();
}

namespace {

CArray checked_extend(const CArray& f, const ProjectorPlan& plan, ProjectorDiagnostics* diag) {
  if (f.size() != plan.zgrid().count && f.size() != plan.padded_length())
    throw InputError("projector input has neither the spectral nor the extended length");
  const Index n = f.size();
  const Index band = std::max<Index>(1, static_cast<Index>(std::floor(plan.policy().taper_fraction * static_cast<double>(n))));
  const double peak = f.abs().maxCoeff();
  double edge = 0.0;
  if (peak > 0) edge = std::max(f.head(band).abs().maxCoeff(), f.tail(band).abs().maxCoeff()) / peak;
  ProjectorDiagnostics d;
  d.edge_ratio = edge;
  CArray g = f;
  // extended-length arrays already live in the periodic space (e.g. earlier
  // projector output, which decays only like 1/s); tapering them would break
  // P+P+ = P+, so only grid samples are windowed
  if (n == plan.zgrid().count && edge > plan.policy().decay_tol) {
    d.windowed = true;
    for (Index i = 0; i < band; ++i) {
      const double t = 0.5 - 0.5 * std::cos(pi * (static_cast<double>(i) + 0.5) / static_cast<double>(band));
      g[i] *= t;
      g[n - 1 - i] *= t;
    }
  }
  if (diag) *diag = d;
  return plan.extend(g);
}

}  // namespace

CArray projector(const CArray& f, Side side, const ProjectorPlan& plan, ProjectorDiagnostics* diag) {
  const CArray g = checked_extend(f, plan, diag);
  ProjectorWorkspace ws(plan);
  CArray out;
  ws.apply(g, side, out);
  return out;
}

CArray hilbert(const CArray& f, const ProjectorPlan& plan, ProjectorDiagnostics* diag) {
  const CArray g = checked_extend(f, plan, diag);
  ProjectorWorkspace ws(plan);
  CArray out;
  ws.hilbert(g, out);
  return out;
}

Complex cauchy_offaxis(const CArray& f, Complex z, const ProjectorPlan& plan, CauchyDiagnostics* diag) {
  if (z.imag() == 0.0) throw InputError("cauchy_offaxis needs Im z != 0");
  const CArray g = plan.extend(f);
  if (diag) diag->near_axis = std::abs(z.imag()) < plan.spacing();
  Complex acc = 0.0;
  for (Index j = 0; j < g.size(); ++j) acc += g[j] / (plan.nodes()[j] - z);
  return acc * plan.spacing() / (2.0 * pi * I);
}

DeltaSet delta_solve(const CArray& rp_in, const CArray& rm_in, const ProjectorPlan& plan) {
  const CArray rp = plan.extend(rp_in), rm = plan.extend(rm_in);
  const Index P = plan.padded_length();
  const CArray prod = rp.conjugate() * rm;
  DeltaSet d;
  d.log_integrand.resize(P);
  for (Index j = 0; j < P; ++j) {
    const Complex v = 1.0 + prod[j];
    if (!(v.real() > 0) || std::abs(v.imag()) > 1e-10 * (1.0 + std::abs(v))) {
      std::ostringstream os;
      os << "1 + conj(r+) r- = " << v << " is not real positive at z = " << plan.node(j)
         << "; scattering data are inconsistent";
      throw DataCorruptionError(os.str());
    }
    d.log_integrand[j] = std::log(v.real());
  }
  ProjectorWorkspace ws(plan);
  CArray gp, gm;
  const CArray g = d.log_integrand.cast<Complex>();
  ws.apply(g, Side::plus, gp);
  ws.apply(g, Side::minus, gm);
  d.delta_plus = gp.exp();
  d.delta_minus = gm.exp();
  d.modulus_err = ((d.delta_plus * d.delta_minus).abs() - 1.0).abs().maxCoeff();
  d.jump_residual = (d.delta_plus - d.delta_minus - prod * d.delta_minus).abs().maxCoeff();
  return d;
}

void write_delta_csv(const std::filesystem::path& path, const DeltaSet& d, const ProjectorPlan& plan) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out.precision(17);
  out << "z,re_dp,im_dp,re_dm,im_dm\n";
  const CArray dp = plan.restrict(d.delta_plus), dm = plan.restrict(d.delta_minus);
  for (Index m = 0; m < dp.size(); ++m)
    out << plan.zgrid().node(m) << ',' << dp[m].real() << ',' << dp[m].imag() << ',' << dm[m].real() << ','
        << dm[m].imag() << '\n';
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace nlsgi
