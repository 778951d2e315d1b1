#include "nlsgi/rh_solver.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace nlsgi {

ReflectionSet make_reflection_set(const ScatteringData& s, const ProjectorPlan& plan, const DeltaSet* deltas) {
  if (s.zgrid.count != plan.zgrid().count || s.zgrid.half_width != plan.zgrid().half_width)
    throw InputError("scattering data and projector plan use different spectral grids");
  ReflectionSet r;
  r.rp = plan.embed(s.rp);
  r.rm = plan.embed(s.rm);
  if (deltas) {
    if (deltas->delta_plus.size() != plan.padded_length()) throw InputError("delta set does not match the plan");
    // the conjugation is only valid if the scalar jump actually holds
    const CArray prod = r.rp.conjugate() * r.rm;
    const double jump = (deltas->delta_plus - deltas->delta_minus - prod * deltas->delta_minus).abs().maxCoeff();
    if (jump > 1e-6) {
      std::ostringstream os;
      os << "delta set does not satisfy the scalar jump for these data (residual " << jump << ")";
      throw DataCorruptionError(os.str());
    }
    const CArray factor = (deltas->delta_plus * deltas->delta_minus).conjugate();
    r.rp_delta = factor * r.rp;
    r.rm_delta = factor * r.rm;
  }
  return r;
}

namespace {

CArray phase(double x, const ProjectorPlan& plan, double sign) {
  const RArray lambda = plan.nodes() + 1.0;
  CArray e(lambda.size());
  for (Index j = 0; j < lambda.size(); ++j) e[j] = std::polar(1.0, sign * 2.0 * lambda[j] * x);
  return e;
}

Complex dot(const CArray& a, const CArray& b) { return (a.conjugate() * b).sum(); }
double norm2(const CArray& a) { return std::sqrt(a.abs2().sum()); }

// One column pair reduced to a single unknown y = 1 + v:
//   v = Pa(c1 Pb(c2 (1 + v)))
// and the partner component Pb(c2 y).
struct PairProblem {
  Side pa, pb;
  const CArray* c1;
  const CArray* c2;
};

struct PairResult {
  CArray y, partner;
  int iterations = 0;
  double contraction = 0.0;
  bool krylov = false;
};

class PairSolver {
 public:
  PairSolver(const PairProblem& p, ProjectorWorkspace& ws, double dz) : p_(p), ws_(ws), dz_(dz) {}

  void apply_K(const CArray& v, CArray& out) {
    tmp_ = *p_.c2 * v;
    ws_.apply(tmp_, p_.pb, tmp2_);
    tmp_ = *p_.c1 * tmp2_;
    ws_.apply(tmp_, p_.pa, out);
  }

  double l2(const CArray& v) const { return std::sqrt(v.abs2().sum() * dz_); }

  PairResult solve(const RHOptions& opts) {
    const Index P = p_.c1->size();
    CArray F;
    apply_K(CArray::Ones(P), F);
    PairResult res;
    CArray v = CArray::Zero(P), next;
    double prev = 0.0;
    bool switch_to_krylov = false;
    for (int it = 1; it <= opts.max_iter; ++it) {
      apply_K(v, next);
      next += F;
      const double diff = l2(next - v);
      v.swap(next);
      res.iterations = it;
      if (it > 1 && prev > 0) res.contraction = diff / prev;
      prev = diff;
      if (diff <= 0.25 * opts.tol) {
        finish(v, res);
        return res;
      }
      if (!std::isfinite(diff)) break;
      if (it >= 3 && res.contraction > opts.krylov_switch) {
        switch_to_krylov = true;
        break;
      }
    }
    (void)switch_to_krylov;
    // Neumann too slow or diverging: restarted GMRES on (I - K) v = F
    res.krylov = true;
    v.setZero();
    const int extra = gmres(F, v, opts);
    res.iterations += extra;
    if (extra < 0 || !v.allFinite()) {
      std::ostringstream os;
      os << "RH solve did not converge after " << opts.max_iter << " iterations (contraction estimate "
         << res.contraction << ")";
      throw NumericalError(os.str());
    }
    finish(v, res);
    return res;
  }

 private:
  void finish(const CArray& v, PairResult& res) {
    res.y = v + 1.0;
    tmp_ = *p_.c2 * res.y;
    ws_.apply(tmp_, p_.pb, res.partner);
  }

  // returns iterations used, or -1 on failure; x holds the solution
  int gmres(const CArray& b, CArray& x, const RHOptions& opts) {
    const int m = std::max(2, opts.restart);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return 0;
    // tolerance in the unscaled 2-norm
    const double target = 0.25 * opts.tol / std::sqrt(dz_);
    std::vector<CArray> V(static_cast<size_t>(m + 1));
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<Complex> cs(static_cast<size_t>(m)), sn(static_cast<size_t>(m)), g(static_cast<size_t>(m + 1));
    CArray w, Kx;
    int total = 0;
    for (int restart = 0; total < opts.max_iter; ++restart) {
      apply_K(x, Kx);
      CArray r = b - (x - Kx);
      double beta = norm2(r);
      if (beta <= target) return total;
      V[0] = r / beta;
      std::fill(g.begin(), g.end(), Complex(0.0));
      g[0] = beta;
      int k = 0;
      for (; k < m && total < opts.max_iter; ++k, ++total) {
        apply_K(V[static_cast<size_t>(k)], Kx);
        w = V[static_cast<size_t>(k)] - Kx;
        for (int i = 0; i <= k; ++i) {
          H(i, k) = dot(V[static_cast<size_t>(i)], w);
          w -= H(i, k) * V[static_cast<size_t>(i)];
        }
        const double hn = norm2(w);
        H(k + 1, k) = hn;
        if (hn > 0) V[static_cast<size_t>(k + 1)] = w / hn;
        for (int i = 0; i < k; ++i) {
          const Complex t = std::conj(cs[static_cast<size_t>(i)]) * H(i, k) + std::conj(sn[static_cast<size_t>(i)]) * H(i + 1, k);
          H(i + 1, k) = -sn[static_cast<size_t>(i)] * H(i, k) + cs[static_cast<size_t>(i)] * H(i + 1, k);
          H(i, k) = t;
        }
        const double den = std::hypot(std::abs(H(k, k)), std::abs(H(k + 1, k)));
        if (den == 0.0) return -1;
        cs[static_cast<size_t>(k)] = H(k, k) / den;
        sn[static_cast<size_t>(k)] = H(k + 1, k) / den;
        H(k, k) = den;
        H(k + 1, k) = 0.0;
        g[static_cast<size_t>(k + 1)] = -sn[static_cast<size_t>(k)] * g[static_cast<size_t>(k)];
        g[static_cast<size_t>(k)] = std::conj(cs[static_cast<size_t>(k)]) * g[static_cast<size_t>(k)];
        if (std::abs(g[static_cast<size_t>(k + 1)]) <= target || hn == 0.0) {
          ++k;
          ++total;
          break;
        }
      }
      // back substitution on the k x k triangle
      Eigen::VectorXcd y(k);
      for (int i = k - 1; i >= 0; --i) {
        Complex s = g[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
        y[i] = s / H(i, i);
      }
      for (int i = 0; i < k; ++i) x += y[i] * V[static_cast<size_t>(i)];
    }
    apply_K(x, Kx);
    return norm2(b - (x - Kx)) <= target ? total : -1;
  }

  PairProblem p_;
  ProjectorWorkspace& ws_;
  double dz_;
  CArray tmp_, tmp2_;
};

RHSolveState solve_branch(Branch branch, double x, const CArray& rp, const CArray& rm, const ProjectorPlan& plan,
                          ProjectorWorkspace& ws, const RHOptions& opts) {
  const CArray beta = rp.conjugate() * phase(x, plan, -1.0);
  const CArray gamma = rm * phase(x, plan, +1.0);
  const Side s_xi = branch == Branch::positive_x ? Side::minus : Side::plus;
  const Side s_eta = branch == Branch::positive_x ? Side::plus : Side::minus;
  RHSolveState st;
  st.branch = branch;
  st.x = x;
  // first column: xi1 = 1 + P_xi(gamma eta1), eta1 = P_eta(beta xi1)
  PairSolver first({s_xi, s_eta, &gamma, &beta}, ws, plan.spacing());
  PairResult a = first.solve(opts);
  // second column: eta2 = 1 + P_eta(beta xi2), xi2 = P_xi(gamma eta2)
  PairSolver second({s_eta, s_xi, &beta, &gamma}, ws, plan.spacing());
  PairResult b = second.solve(opts);
  st.xi1 = std::move(a.y);
  st.eta1 = std::move(a.partner);
  st.eta2 = std::move(b.y);
  st.xi2 = std::move(b.partner);
  st.iterations = a.iterations + b.iterations;
  st.contraction = std::max(a.contraction, b.contraction);
  st.used_krylov = a.krylov || b.krylov;
  return st;
}

double branch_residual(const RHSolveState& st, const CArray& rp, const CArray& rm, const ProjectorPlan& plan,
                       ProjectorWorkspace& ws) {
  const CArray beta = rp.conjugate() * phase(st.x, plan, -1.0);
  const CArray gamma = rm * phase(st.x, plan, +1.0);
  const Side s_xi = st.branch == Branch::positive_x ? Side::minus : Side::plus;
  const Side s_eta = st.branch == Branch::positive_x ? Side::plus : Side::minus;
  CArray t;
  double sum = 0.0;
  ws.apply(gamma * st.eta1, s_xi, t);
  sum += (st.xi1 - 1.0 - t).abs2().sum();
  ws.apply(gamma * st.eta2, s_xi, t);
  sum += (st.xi2 - t).abs2().sum();
  ws.apply(beta * st.xi1, s_eta, t);
  sum += (st.eta1 - t).abs2().sum();
  ws.apply(beta * st.xi2, s_eta, t);
  sum += (st.eta2 - 1.0 - t).abs2().sum();
  return std::sqrt(sum * plan.spacing());
}

}  // namespace

JumpData build_jump(double x, const ScatteringData& s, const ProjectorPlan& plan, const DeltaSet* deltas) {
  if (x < 0 && !deltas) throw InputError("negative_x branch needs the delta set to build its jump");
  return build_jump(x, make_reflection_set(s, plan, x < 0 ? deltas : nullptr), plan);
}

JumpData build_jump(double x, const ReflectionSet& refl, const ProjectorPlan& plan) {
  JumpData j;
  j.x = x;
  const CArray ep = phase(x, plan, +1.0), em = phase(x, plan, -1.0);
  if (x < 0) {
    if (refl.rp_delta.size() == 0) throw InputError("negative_x branch needs the delta set to build its jump");
    j.delta_modified = true;
    j.r11 = CArray::Zero(plan.padded_length());
    j.r12 = refl.rp_delta.conjugate() * em;
    j.r21 = refl.rm_delta * ep;
    j.r22 = refl.rp_delta.conjugate() * refl.rm_delta;
  } else {
    j.r11 = refl.rp.conjugate() * refl.rm;
    j.r12 = refl.rp.conjugate() * em;
    j.r21 = refl.rm * ep;
    j.r22 = CArray::Zero(plan.padded_length());
  }
  return j;
}

RHSolveState solve_rh_positive(double x, const ReflectionSet& refl, const ProjectorPlan& plan, ProjectorWorkspace& ws,
                               const RHOptions& opts) {
  if (x < 0) throw InputError("solve_rh_positive needs x >= 0");
  RHSolveState st = solve_branch(Branch::positive_x, x, refl.rp, refl.rm, plan, ws, opts);
  st.residual = branch_residual(st, refl.rp, refl.rm, plan, ws);
  return st;
}

RHSolveState solve_rh_negative(double x, const ReflectionSet& refl, const ProjectorPlan& plan, ProjectorWorkspace& ws,
                               const RHOptions& opts) {
  if (refl.rp_delta.size() == 0) throw InputError("solve_rh_negative needs the delta set");
  if (x > 0) throw InputError("solve_rh_negative needs x <= 0");
  RHSolveState st = solve_branch(Branch::negative_x, x, refl.rp_delta, refl.rm_delta, plan, ws, opts);
  st.residual = branch_residual(st, refl.rp_delta, refl.rm_delta, plan, ws);
  return st;
}

RHSolveState solve_rh_positive(double x, const ScatteringData& s, const ProjectorPlan& plan, const RHOptions& opts) {
  ProjectorWorkspace ws(plan);
  return solve_rh_positive(x, make_reflection_set(s, plan), plan, ws, opts);
}

RHSolveState solve_rh_negative(double x, const ScatteringData& s, const DeltaSet& deltas, const ProjectorPlan& plan,
                               const RHOptions& opts) {
  ProjectorWorkspace ws(plan);
  return solve_rh_negative(x, make_reflection_set(s, plan, &deltas), plan, ws, opts);
}

double rh_residual(const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan, ProjectorWorkspace& ws) {
  if (st.branch == Branch::positive_x) return branch_residual(st, refl.rp, refl.rm, plan, ws);
  return branch_residual(st, refl.rp_delta, refl.rm_delta, plan, ws);
}

double deviation_norm(const RHSolveState& st, const ProjectorPlan& plan) {
  const double s = (st.xi1 - 1.0).abs2().sum() + st.xi2.abs2().sum() + st.eta1.abs2().sum() + (st.eta2 - 1.0).abs2().sum();
  return std::sqrt(s * plan.spacing());
}

void write_rh_debug_csv(const std::filesystem::path& path, const RHSolveState& st, const ProjectorPlan& plan) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out.precision(17);
  out << "z,re_xi1,im_xi1,re_xi2,im_xi2,re_eta1,im_eta1,re_eta2,im_eta2\n";
  const CArray a = plan.restrict(st.xi1), b = plan.restrict(st.xi2), c = plan.restrict(st.eta1), d = plan.restrict(st.eta2);
  for (Index m = 0; m < a.size(); ++m)
    out << plan.zgrid().node(m) << ',' << a[m].real() << ',' << a[m].imag() << ',' << b[m].real() << ',' << b[m].imag()
        << ',' << c[m].real() << ',' << c[m].imag() << ',' << d[m].real() << ',' << d[m].imag() << '\n';
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace nlsgi
