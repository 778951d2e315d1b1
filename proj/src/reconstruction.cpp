#include "nlsgi/reconstruction.hpp"

#include <memory>
#include <sstream>

#include "nlsgi/fourier.hpp"
#include "nlsgi/parallel.hpp"

namespace nlsgi {

namespace {

Complex weighted_integral(const CArray& coef, double x, double sign, const CArray& field, const ProjectorPlan& plan) {
  const RArray& s = plan.nodes();
  Complex acc = 0.0;
  for (Index j = 0; j < s.size(); ++j) acc += coef[j] * std::polar(1.0, sign * 2.0 * (s[j] + 1.0) * x) * field[j];
  return acc * plan.spacing();
}

}  // namespace

Complex reconstruct_point_positive(double x, const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan) {
  if (st.branch != Branch::positive_x) throw InputError("state was not solved on the positive branch");
  return calibration.potential_factor * weighted_integral(refl.rp.conjugate(), x, -1.0, st.xi1, plan);
}

Complex reconstruct_point_negative(double x, const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan) {
  if (st.branch != Branch::negative_x) throw InputError("state was not solved on the negative branch");
  return calibration.potential_factor * weighted_integral(refl.rp_delta.conjugate(), x, -1.0, st.xi1, plan);
}

Complex conj_w_from_state(const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan) {
  const CArray& rm = st.branch == Branch::positive_x ? refl.rm : refl.rm_delta;
  return calibration.conj_w_factor * weighted_integral(rm, st.x, +1.0, st.eta2, plan);
}

double w_residual(const RHSolveState& st, const ReflectionSet& refl, const ProjectorPlan& plan, const CArray& u_rec,
                  const SpatialGrid& grid, Index j) {
  const CArray w = compute_w(u_rec, grid);
  return std::abs(conj_w_from_state(st, refl, plan) - std::conj(w[j]));
}

std::vector<PointSample> reconstruct_nodes(const ReflectionSet& refl, const ProjectorPlan& plan, const SpatialGrid& grid,
                                           const std::vector<Index>& nodes, const ReconstructionOptions& opts) {
  const Index n = static_cast<Index>(nodes.size());
  std::vector<PointSample> out(nodes.size());
  const int t = effective_threads(opts.threads, n);
  std::vector<std::unique_ptr<ProjectorWorkspace>> ws;
  for (int i = 0; i < t; ++i) ws.push_back(std::make_unique<ProjectorWorkspace>(plan));
  std::vector<std::string> failures(nodes.size());
  parallel_for(n, t, [&](Index i, int worker) {
    const Index j = nodes[static_cast<size_t>(i)];
    const double x = grid.node(j);
    try {
      // the seam x = 0 belongs to the positive branch
      const bool pos = j >= grid.origin_index();
      const RHSolveState st = pos ? solve_rh_positive(x, refl, plan, *ws[static_cast<size_t>(worker)], opts.rh)
                                  : solve_rh_negative(x, refl, plan, *ws[static_cast<size_t>(worker)], opts.rh);
      PointSample& p = out[static_cast<size_t>(i)];
      p.j = j;
      p.u = pos ? reconstruct_point_positive(x, st, refl, plan) : reconstruct_point_negative(x, st, refl, plan);
      p.conj_w = conj_w_from_state(st, refl, plan);
      p.iterations = st.iterations;
      p.residual = st.residual;
      p.krylov = st.used_krylov;
      if (st.residual > opts.rh.tol) {
        std::ostringstream os;
        os << "RH residual " << st.residual << " exceeds rh_tol";
        failures[static_cast<size_t>(i)] = os.str();
      }
    } catch (const NumericalError& e) {
      failures[static_cast<size_t>(i)] = e.what();
    }
  });
  std::ostringstream agg;
  int count = 0;
  for (size_t i = 0; i < failures.size(); ++i) {
    if (failures[i].empty()) continue;
    if (count < 10) agg << "\n  x = " << grid.node(nodes[i]) << ": " << failures[i];
    ++count;
  }
  if (count) throw NumericalError("RH solve failed at " + std::to_string(count) + " x node(s):" + agg.str());
  return out;
}

double seam_gap(const CArray& u, const SpatialGrid& grid) {
  const Index j0 = grid.origin_index();
  const Complex extrap = 4.0 * u[j0 - 1] - 6.0 * u[j0 - 2] + 4.0 * u[j0 - 3] - u[j0 - 4];
  return std::abs(extrap - u[j0]);
}

ReconstructionResult reconstruct_field(const ScatteringData& s, const DeltaSet* deltas, const SpatialGrid& grid,
                                       const ProjectorPlan& plan, const ReconstructionOptions& opts) {
  validate(grid);
  std::optional<DeltaSet> own;
  if (!deltas) {
    own = delta_solve(s.rp, s.rm, plan);
    deltas = &*own;
  }
  const ReflectionSet refl = make_reflection_set(s, plan, deltas);
  std::vector<Index> nodes(static_cast<size_t>(grid.count));
  for (Index j = 0; j < grid.count; ++j) nodes[static_cast<size_t>(j)] = j;
  const std::vector<PointSample> pts = reconstruct_nodes(refl, plan, grid, nodes, opts);

  ReconstructionResult r;
  r.grid = grid;
  r.rh = opts.rh;
  r.seam_tol = opts.seam_tol;
  r.u_rec.resize(grid.count);
  CArray conj_w(grid.count);
  r.iterations.resize(static_cast<size_t>(grid.count));
  for (const auto& p : pts) {
    r.u_rec[p.j] = p.u;
    conj_w[p.j] = p.conj_w;
    r.iterations[static_cast<size_t>(p.j)] = p.iterations;
    r.max_rh_residual = std::max(r.max_rh_residual, p.residual);
    r.krylov_count += p.krylov ? 1 : 0;
  }
  const CArray w = compute_w(r.u_rec, grid);
  r.w_residual = (conj_w - w.conjugate()).abs();
  r.seam_gap = seam_gap(r.u_rec, grid);
  r.norms = norms(r.u_rec, grid);
  return r;
}

}  // namespace nlsgi
