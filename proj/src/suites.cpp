#include "nlsgi/suites.hpp"

#include <limits>
#include <random>

namespace nlsgi {

std::string version_string() {
#ifdef NLSGI_VERSION
  return NLSGI_VERSION;
#else
  return "dev";
#endif
}

void SuiteReport::add(std::string name, double measured, double bound, bool ok) {
  checks.push_back({std::move(name), measured, bound, ok});
  pass = pass && ok;
}

void SuiteReport::add_le(std::string name, double measured, double bound) {
  add(std::move(name), measured, bound, std::isfinite(measured) && measured <= bound);
}

Json SuiteReport::to_json() const {
  Json j;
  j["suite"] = suite;
  j["pass"] = pass;
  j["checks"] = Json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"measured", c.measured}, {"bound", c.bound}, {"pass", c.pass}});
  j["provenance"] = provenance;
  j["provenance"]["config_hash"] = config_hash;
  return j;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"identities", "projectors", "roundtrip", "evolution", "lipschitz"};
  return names;
}

namespace {

struct Pipeline {
  SpatialGrid xg;
  SpectralGrid zg;
  PotentialField field;
  ScatteringData scat;
  std::unique_ptr<ProjectorPlan> plan;
  DeltaSet deltas;
};

RunConfig with_potential(const RunConfig& cfg, const std::string& potential) {
  RunConfig c = cfg;
  c.potential = potential;
  return c;
}

RunConfig refined(const RunConfig& cfg, int level) {
  RunConfig c = cfg;
  c.N = cfg.N << level;
  c.M = cfg.M << level;
  return c;
}

Pipeline run_pipeline(const RunConfig& cfg, int threads, bool gate = true) {
  Pipeline p;
  p.xg = spatial_grid(cfg);
  p.zg = spectral_grid(cfg);
  p.field = sample_potential(parse_potential_spec(cfg.potential), p.xg, cfg.boundary_tol);
  p.scat = compute_scattering(p.field, p.zg, scattering_options(cfg, threads));
  if (gate) check_gate(p.scat, cfg.gate_tol);
  p.plan = std::make_unique<ProjectorPlan>(p.zg, padding_policy(cfg));
  p.deltas = delta_solve(p.scat.rp, p.scat.rm, *p.plan);
  return p;
}

// x nodes 0, +-L/32, ... inside [-L/2, L/2]; identical physical points at every refinement level
std::vector<Index> probe_nodes(const SpatialGrid& g) {
  std::vector<Index> out;
  const Index stride = std::max<Index>(1, g.count / 64);
  for (Index k = -16; k <= 16; ++k) out.push_back(g.origin_index() + k * stride);
  return out;
}

double probe_error(const std::vector<PointSample>& pts, const CArray& exact) {
  double err = 0.0, peak = 0.0;
  for (const auto& p : pts) {
    err = std::max(err, std::abs(p.u - exact[p.j]));
    peak = std::max(peak, std::abs(exact[p.j]));
  }
  return peak > 0 ? err / peak : err;
}

std::string amplitude_variant(const std::string& spec, double amplitude) {
  PotentialSpec p = parse_potential_spec(spec);
  if (auto* s = std::get_if<SechPreset>(&p)) s->amplitude = amplitude;
  else if (auto* g = std::get_if<GaussianPreset>(&p)) g->amplitude = amplitude;
  else throw InputError("lipschitz suite needs a sech or gaussian preset");
  return to_string(p);
}

double preset_amplitude(const std::string& spec) {
  PotentialSpec p = parse_potential_spec(spec);
  if (auto* s = std::get_if<SechPreset>(&p)) return s->amplitude;
  if (auto* g = std::get_if<GaussianPreset>(&p)) return g->amplitude;
  throw InputError("suite needs a sech or gaussian preset");
}

void suite_identities(SuiteReport& rep, const RunConfig& cfg, int threads) {
  Pipeline p = run_pipeline(cfg, threads, false);
  const ScatteringData& s = p.scat;
  rep.add_le("unitarity_z_positive", s.unitarity_pos_err, 1e-6);
  rep.add_le("unitarity_z_negative", s.unitarity_neg_err, 1e-6);
  rep.add_le("parity_branch_flip", s.parity_err, 1e-10);
  const RArray z = s.zgrid.nodes();
  const double rm_scale = std::max(s.rm.abs().maxCoeff(), 1e-300);
  rep.add_le("rm_equals_4z_rp", (s.rm - 4.0 * z.cast<Complex>() * s.rp).abs().maxCoeff() / rm_scale, 1e-12);
  rep.add_le("one_plus_rr_equals_inv_abs_a2",
             ((1.0 + s.rp.conjugate() * s.rm) - (1.0 / s.a.abs2()).cast<Complex>()).abs().maxCoeff(), 1e-6);
  rep.add("gate_min_abs_a", s.min_abs_a, cfg.gate_tol, s.min_abs_a > cfg.gate_tol);
  rep.add_le("gate_zero_count", std::abs(s.zero_count), 0.5);
  const double bound = soliton_free_bound(p.field);
  rep.add("soliton_free_bound_below_min_abs_a", bound, s.min_abs_a + 1e-6, bound <= s.min_abs_a + 1e-6);
  rep.add_le("delta_modulus", p.deltas.modulus_err, 1e-8);
  rep.add_le("delta_jump_residual", p.deltas.jump_residual, 1e-6);
  const ReflectionSet refl = make_reflection_set(s, *p.plan, &p.deltas);
  const double mod = std::max((refl.rp_delta.abs() - refl.rp.abs()).abs().maxCoeff(),
                              (refl.rm_delta.abs() - refl.rm.abs()).abs().maxCoeff());
  rep.add_le("modified_reflection_modulus", mod, 1e-8);
  const JumpData j0 = build_jump(0.0, refl, *p.plan);
  rep.add_le("jump_r12_at_origin", (j0.r12 - refl.rp.conjugate()).abs().maxCoeff(), 0.0);
}

void suite_projectors(SuiteReport& rep, const RunConfig& cfg) {
  const SpectralGrid zg = spectral_grid(cfg);
  const ProjectorPlan plan(zg, padding_policy(cfg));
  ProjectorWorkspace ws(plan);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double e_diff = 0, e_sum = 0, e_ann = 0, e_idem_p = 0, e_idem_m = 0;
  const double Z = zg.half_width;
  for (int trial = 0; trial < 100; ++trial) {
    // sum of a few complex Gaussian bumps well inside the grid
    CArray f = CArray::Zero(plan.padded_length());
    for (int b = 0; b < 4; ++b) {
      const Complex amp(uni(rng), uni(rng));
      const double c = 0.5 * Z * uni(rng), w = 1.0 + 0.5 * (uni(rng) + 1.0) * std::min(2.0, 0.05 * Z);
      for (Index j = 0; j < f.size(); ++j) {
        const double t = (plan.nodes()[j] - c) / w;
        f[j] += amp * std::exp(-t * t);
      }
    }
    CArray pp, pm, h, ppp, pmp, pmm;
    ws.apply(f, Side::plus, pp);
    ws.apply(f, Side::minus, pm);
    ws.hilbert(f, h);
    ws.apply(pp, Side::plus, ppp);
    ws.apply(pp, Side::minus, pmp);
    ws.apply(pm, Side::minus, pmm);
    e_diff = std::max(e_diff, (pp - pm - f).abs().maxCoeff());
    e_sum = std::max(e_sum, (pp + pm + I * h).abs().maxCoeff());
    e_ann = std::max(e_ann, pmp.abs().maxCoeff());
    e_idem_p = std::max(e_idem_p, (ppp - pp).abs().maxCoeff());
    e_idem_m = std::max(e_idem_m, (pmm + pm).abs().maxCoeff());
  }
  rep.add_le("plus_minus_minus_is_identity", e_diff, 1e-12);
  rep.add_le("plus_plus_minus_is_minus_i_hilbert", e_sum, 1e-12);
  rep.add_le("minus_after_plus_vanishes", e_ann, 1e-10);
  rep.add_le("plus_idempotent", e_idem_p, 1e-10);
  rep.add_le("minus_squared_is_minus_minus", e_idem_m, 1e-10);
}

void suite_roundtrip(SuiteReport& rep, const RunConfig& cfg, int threads) {
  double prev = 0.0, first = 0.0, second = 0.0;
  bool monotone = true;
  for (int level = 0; level < 3; ++level) {
    const RunConfig c = refined(cfg, level);
    Pipeline p = run_pipeline(c, threads);
    const ReflectionSet refl = make_reflection_set(p.scat, *p.plan, &p.deltas);
    const auto pts = reconstruct_nodes(refl, *p.plan, p.xg, probe_nodes(p.xg), reconstruction_options(c, threads));
    const double err = probe_error(pts, p.field.u);
    rep.add_le("roundtrip_rel_linf_level" + std::to_string(level), err, 1e-3);
    if (level == 0) {
      first = err;
      if (p.field.u.imag().abs().maxCoeff() == 0.0) {
        double im = 0.0;
        for (const auto& q : pts) im = std::max(im, std::abs(q.u.imag()));
        const double peak = p.field.u.abs().maxCoeff();
        rep.add_le("real_input_imag_part_rel", im / peak, std::max(err, 1e-12));
      }
    }
    if (level == 1) second = err;
    if (level > 0 && !(err < prev)) monotone = false;
    prev = err;
  }
  rep.add("roundtrip_monotone_under_refinement", prev, first, monotone);
  rep.add("roundtrip_halves_under_doubling", first / second, 2.0, first / second >= 2.0);
}

// L-infinity gap between an IST solution on probe nodes and a reference field
double probe_gap(const std::vector<PointSample>& pts, const CArray& ref) {
  double g = 0.0;
  for (const auto& p : pts) g = std::max(g, std::abs(p.u - ref[p.j]));
  return g;
}

void suite_evolution(SuiteReport& rep, const RunConfig& cfg, int threads) {
  const EvolutionConfig& ev = cfg.evolution;
  const double t = ev.t_final;
  Pipeline p = run_pipeline(cfg, threads);
  const ScatteringData st = evolve_reflection(p.scat, t, ev);
  const double scale_p = std::max(p.scat.rp.abs().maxCoeff(), 1e-300);
  const double scale_m = std::max(p.scat.rm.abs().maxCoeff(), 1e-300);
  rep.add_le("reflection_modulus_preserved",
             std::max((st.rp.abs() - p.scat.rp.abs()).abs().maxCoeff() / scale_p,
                      (st.rm.abs() - p.scat.rm.abs()).abs().maxCoeff() / scale_m),
             1e-15);
  rep.add_le("a_invariant", (st.a - p.scat.a).abs().maxCoeff(), 0.0);
  const ScatteringData half = evolve_reflection(evolve_reflection(p.scat, 0.5 * t, ev), 0.5 * t, ev);
  rep.add_le("evolution_additive", (half.rp - st.rp).abs().maxCoeff() / scale_p, 1e-12);
  const DeltaSet dt = delta_solve(st.rp, st.rm, *p.plan);
  rep.add_le("delta_time_invariant",
             std::max((dt.delta_plus - p.deltas.delta_plus).abs().maxCoeff(),
                      (dt.delta_minus - p.deltas.delta_minus).abs().maxCoeff()),
             1e-8);

  // IST against the reference PDE solver on the full field
  IstOptions io;
  io.reconstruction = reconstruction_options(cfg, threads);
  io.gate_tol = cfg.gate_tol;
  const IstResult ist = ist_solve(p.scat, t, ev, p.xg, *p.plan, io);
  const ReferenceState ref = reference_solve(p.field, t, ev);
  const double gap = (ist.field.u_rec - ref.u).abs().maxCoeff();
  rep.add_le("ist_vs_reference_linf_gap", gap, 1e-2);
  rep.add_le("reference_mass_drift", ref.mass_drift, 1e-8);
  const double dx = p.xg.spacing();
  const double rt = probe_error(reconstruct_nodes(make_reflection_set(p.scat, *p.plan, &p.deltas), *p.plan, p.xg,
                                                  probe_nodes(p.xg), io.reconstruction),
                                p.field.u);
  const double mass_ist = std::abs(mass(ist.field.u_rec, dx) - mass(p.field.u, dx));
  rep.add_le("ist_mass_drift_within_2x_roundtrip", mass_ist / mass(p.field.u, dx), 2.0 * std::max(rt, 1e-12));

  // refinement: probe nodes on the doubled grids
  const RunConfig c1 = refined(cfg, 1);
  Pipeline p1 = run_pipeline(c1, threads);
  const ScatteringData st1 = evolve_reflection(p1.scat, t, ev);
  const DeltaSet d1 = delta_solve(st1.rp, st1.rm, *p1.plan);
  const auto pts1 = reconstruct_nodes(make_reflection_set(st1, *p1.plan, &d1), *p1.plan, p1.xg, probe_nodes(p1.xg),
                                      reconstruction_options(c1, threads));
  const ReferenceState ref1 = reference_solve(p1.field, t, ev);
  std::vector<PointSample> pts0;
  for (Index j : probe_nodes(p.xg)) pts0.push_back({j, ist.field.u_rec[j], 0.0, 0, 0.0, false});
  const double g0 = probe_gap(pts0, ref.u), g1 = probe_gap(pts1, ref1.u);
  rep.add("ist_gap_decreases_2x_under_refinement", g0 / std::max(g1, 1e-300), 2.0, g0 >= 2.0 * g1);

  // 4th order in time: error against a dt/4 run, at steps large enough to sit above round-off
  EvolutionConfig oc = ev;
  const double T = 0.4, h = 0.02;
  oc.t_final = T;
  oc.snapshot_times.clear();
  oc.c_stab = h / (dx * dx);
  oc.dt = h;
  const CArray uh = reference_solve(p.field, T, oc).u;
  oc.dt = h / 2;
  const CArray uh2 = reference_solve(p.field, T, oc).u;
  oc.dt = h / 8;
  const CArray ufine = reference_solve(p.field, T, oc).u;
  const double e1 = (uh - ufine).abs().maxCoeff(), e2 = (uh2 - ufine).abs().maxCoeff();
  rep.add("reference_rk4_order_ratio", e1 / std::max(e2, 1e-300), 8.0, e1 >= 8.0 * e2);
}

struct LipschitzSample {
  ScatteringData scat;
  CArray u_rec;
  CArray u;
};

void suite_lipschitz(SuiteReport& rep, const RunConfig& cfg, int threads) {
  const double A = preset_amplitude(cfg.potential);
  auto run = [&](double amp) {
    Pipeline p = run_pipeline(with_potential(cfg, amplitude_variant(cfg.potential, amp)), threads);
    LipschitzSample s;
    s.u = p.field.u;
    s.u_rec = reconstruct_field(p.scat, &p.deltas, p.xg, *p.plan, reconstruction_options(cfg, threads)).u_rec;
    s.scat = std::move(p.scat);
    return s;
  };
  const SpatialGrid xg = spatial_grid(cfg);
  const LipschitzSample base = run(A);
  std::vector<double> forward, inverse;
  for (double eps : {1e-3, 1e-4}) {
    const LipschitzSample pert = run(A + eps);
    const double du = norms(CArray(pert.u - base.u), xg).h2_h11();
    const double dr = h1_l21_norm(pert.scat.rp - base.scat.rp, base.scat.zgrid) +
                      h1_l21_norm(pert.scat.rm - base.scat.rm, base.scat.zgrid);
    const double durec = norms(CArray(pert.u_rec - base.u_rec), xg).h2_h11();
    forward.push_back(dr / du);
    inverse.push_back(durec / dr);
    const std::string tag = eps == 1e-3 ? "1e-3" : "1e-4";
    constexpr double finite = std::numeric_limits<double>::max();
    rep.add_le("forward_ratio_eps_" + tag, dr / du, finite);
    rep.add_le("inverse_ratio_eps_" + tag, durec / dr, finite);
  }
  auto variation = [](const std::vector<double>& v) {
    return std::abs(v[0] - v[1]) / std::max(std::abs(v[0]), std::abs(v[1]));
  };
  rep.add_le("forward_ratio_variation", variation(forward), 0.2);
  rep.add_le("inverse_ratio_variation", variation(inverse), 0.2);
}

}  // namespace

SuiteReport run_suite(const std::string& name, const RunConfig& cfg, int threads) {
  SuiteReport rep;
  rep.suite = name;
  rep.config_hash = config_hash(cfg);
  rep.provenance = {{"nlsgi", version_string()},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)}};
  auto one = [&](const std::string& n) {
    if (n == "identities") suite_identities(rep, cfg, threads);
    else if (n == "projectors") suite_projectors(rep, cfg);
    else if (n == "roundtrip") suite_roundtrip(rep, cfg, threads);
    else if (n == "evolution") suite_evolution(rep, cfg, threads);
    else if (n == "lipschitz") suite_lipschitz(rep, cfg, threads);
    else throw InputError("unknown suite '" + n + "' (expected identities, projectors, roundtrip, evolution, lipschitz, all)");
  };
  if (name == "all") {
    for (const auto& n : suite_names()) {
      const size_t before = rep.checks.size();
      one(n);
      for (size_t i = before; i < rep.checks.size(); ++i) rep.checks[i].name = n + "." + rep.checks[i].name;
    }
  } else {
    one(name);
  }
  return rep;
}

}  // namespace nlsgi
