#include <doctest.h>

#include "nlsgi/reconstruction.hpp"
#include "oracles.hpp"

using namespace nlsgi;

namespace {

struct Setup {
  PotentialField u;
  ScatteringData s;
  ProjectorPlan plan;
  DeltaSet deltas;
  ReflectionSet refl;
};

Setup setup(double A, double L, Index N, double Z, Index M) {
  PotentialField u = sample_potential(SechPreset{A, 0, 0}, SpatialGrid{L, N});
  SpectralGrid zg{Z, M};
  ScatteringData s = compute_scattering(u, zg);
  PaddingPolicy pol;
  pol.spatial_spacing = u.grid.spacing();
  ProjectorPlan plan(zg, pol);
  DeltaSet d = delta_solve(s.rp, s.rm, plan);
  ReflectionSet r = make_reflection_set(s, plan, &d);
  return {std::move(u), std::move(s), std::move(plan), std::move(d), std::move(r)};
}

ReconstructionOptions threaded(int t = 4) {
  ReconstructionOptions o;
  o.threads = t;
  return o;
}

// 8th-order central first derivative on grid samples f[c-4..c+4]
Complex fd8(const std::vector<Complex>& f, Index c, double h) {
  static const double w[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  Complex d = 0;
  for (int k = 1; k <= 4; ++k) d += w[k - 1] * (f[static_cast<size_t>(c + k)] - f[static_cast<size_t>(c - k)]);
  return d / h;
}

// conj(w) from u_rec by a local stencil around each probe versus the RH display
double probe_w_residual(const Setup& st, const std::vector<double>& xs) {
  const SpatialGrid& g = st.u.grid;
  std::vector<Index> nodes;
  for (double x : xs) {
    const Index c = g.origin_index() + static_cast<Index>(std::llround(x / g.spacing()));
    for (Index k = -4; k <= 4; ++k) nodes.push_back(c + k);
  }
  const auto samples = reconstruct_nodes(st.refl, st.plan, g, nodes, threaded());
  double worst = 0;
  for (size_t p = 0; p < xs.size(); ++p) {
    std::vector<Complex> f;
    for (size_t k = 0; k < 9; ++k) f.push_back(samples[9 * p + k].u);
    const Complex u = f[4], ux = fd8(f, 4, g.spacing());
    const Complex cw = I * std::conj(ux) + 2.0 * std::conj(u) - 0.5 * std::norm(u) * std::conj(u);
    worst = std::max(worst, std::abs(samples[9 * p + 4].conj_w - cw));
  }
  return worst;
}

}  // namespace

TEST_CASE("calibration constants against the Born limit") {
  // first order: r+ = b/(2k) = -F/2 and r- = 2k b = -2zF with F(lam) = int e^{-2i lam y} conj(u) dy.
  // For u = A sech, F = A pi sech(pi lam). With xi^(1) = eta^(2) = 1 both displays must return
  // u and the linear part of conj(w), i conj(u)_x + 2 conj(u).
  CHECK(calibration.potential_factor == Complex(-2.0 / pi, 0.0));
  CHECK(calibration.conj_w_factor == Complex(1.0 / pi, 0.0));
  const double A = 1.0;
  SpectralGrid zg{40, 8192};
  auto F = [&](double lam) { return A * pi / std::cosh(pi * lam); };
  CHECK(std::abs(oracle::integrate_panels([&](double y) { return std::polar(A * oracle::sech(y), -2.0 * 0.37 * y); },
                                          -40.0, 40.0) -
                 F(0.37)) < 1e-12);
  double eu = 0, ew = 0;
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
    Complex su = 0, sw = 0;
    for (Index m = 0; m < zg.count; ++m) {
      const double z = zg.node(m), lam = z + 1;
      const Complex rp = -0.5 * F(lam), rm = -2.0 * z * F(lam);
      su += std::conj(rp) * std::polar(1.0, -2.0 * lam * x);
      sw += rm * std::polar(1.0, 2.0 * lam * x);
    }
    su *= calibration.potential_factor * zg.spacing();
    sw *= calibration.conj_w_factor * zg.spacing();
    const double u = A * oracle::sech(x), ux = -u * std::tanh(x);
    eu = std::max(eu, std::abs(su - u));
    ew = std::max(ew, std::abs(sw - Complex(2.0 * u, ux)));
  }
  CHECK(eu < 1e-10);
  CHECK(ew < 1e-8);
}

TEST_CASE("zero scattering data reconstructs the zero field") {
  SpectralGrid zg{10, 256};
  ScatteringData s;
  s.zgrid = zg;
  s.k = zg.branch();
  s.a = CArray::Ones(256);
  s.b = CArray::Zero(256);
  finalize_scattering(s);
  ProjectorPlan plan(zg);
  ReconstructionResult r = reconstruct_field(s, nullptr, SpatialGrid{5, 64}, plan);
  CHECK(r.u_rec.abs().maxCoeff() == 0.0);
  CHECK(r.w_residual.maxCoeff() == 0.0);
  CHECK(r.seam_gap == 0.0);
}

TEST_CASE("small sech round trip on both half-lines") {
  const Setup st = setup(1e-3, 20, 2048, 40, 4096);
  const SpatialGrid& g = st.u.grid;
  std::vector<Index> pos, neg;
  for (Index j = g.origin_index(); g.node(j) <= 10.0; j += 8) pos.push_back(j);
  for (Index j = g.origin_index() - 1; g.node(j) >= -10.0; j -= 8) neg.push_back(j);
  auto rel_err = [&](const std::vector<Index>& nodes) {
    double e = 0, peak = 0;
    for (const PointSample& p : reconstruct_nodes(st.refl, st.plan, g, nodes, threaded())) {
      e = std::max(e, std::abs(p.u - 1e-3 * oracle::sech(g.node(p.j))));
      peak = std::max(peak, 1e-3 * oracle::sech(g.node(p.j)));
    }
    return e / peak;
  };
  const double ep = rel_err(pos), en = rel_err(neg);
  MESSAGE("relative error x >= 0: " << ep << ", x < 0: " << en);
  CHECK(ep <= 1e-3);
  CHECK(en <= 1e-3);
}

TEST_CASE("seam between the branches") {
  const Setup st = setup(0.3, 20, 2048, 40, 4096);
  const SpatialGrid& g = st.u.grid;
  const Index o = g.origin_index();
  std::vector<Index> nodes;
  for (Index j = o - 4; j <= o; ++j) nodes.push_back(j);
  const auto s = reconstruct_nodes(st.refl, st.plan, g, nodes, threaded());
  // max |u_x| of 0.3 sech is 0.3 / 2
  CHECK(std::abs(s[4].u - s[3].u) <= 10.0 * g.spacing() * 0.15);
  CArray u = CArray::Zero(g.count);
  for (const PointSample& p : s) u[p.j] = p.u;
  const double gap = seam_gap(u, g);
  const Complex extrap = 4.0 * s[3].u - 6.0 * s[2].u + 4.0 * s[1].u - s[0].u;
  CHECK(gap == doctest::Approx(std::abs(extrap - s[4].u)));
  CHECK(gap <= ReconstructionOptions{}.seam_tol);
}

TEST_CASE("seam_gap vanishes on a cubic") {
  SpatialGrid g{4, 32};
  CArray u(32);
  for (Index j = 0; j < 32; ++j) {
    const double x = g.node(j);
    u[j] = Complex(1 + x - 0.5 * x * x + 0.1 * x * x * x, x);
  }
  CHECK(seam_gap(u, g) < 1e-12);
}

TEST_CASE("w residual at A = 0.1 and its refinement") {
  const std::vector<double> xs{-6.0, -2.0, -0.5, 1.0, 3.0, 7.0};
  const double coarse = probe_w_residual(setup(0.1, 20, 2048, 40, 4096), xs);
  const double fine = probe_w_residual(setup(0.1, 20, 4096, 40, 8192), xs);
  MESSAGE("w residual default " << coarse << ", doubled " << fine);
  CHECK(coarse <= 1e-3);
  CHECK(coarse / fine >= 2.0);
}

TEST_CASE("full field on a small grid: residual, norms bound, re-scatter, conjugation") {
  // L = 20, N = 512 keeps 2(Z+1)dx < pi for Z = 16
  std::vector<double> ratios;
  for (double A : {0.05, 0.1, 0.2, 0.4}) {
    const Setup st = setup(A, 20, 512, 16, 1024);
    const ReconstructionResult r = reconstruct_field(st.s, &st.deltas, st.u.grid, st.plan, threaded());
    CHECK(r.max_rh_residual <= 1e-10);
    CHECK(r.u_rec.allFinite());
    CHECK(r.w_residual.allFinite());
    const double err = (r.u_rec - st.u.u).abs().maxCoeff() / st.u.u.abs().maxCoeff();
    // real u: the imaginary part stays within the round-trip error
    CHECK(r.u_rec.imag().abs().maxCoeff() <= std::max(err, 1e-12) * st.u.u.abs().maxCoeff());
    CHECK(std::abs(r.u_rec[0]) < 1e-3 * st.u.u.abs().maxCoeff());

    const double data = h1_l21_norm(st.s.rp, st.s.zgrid) + h1_l21_norm(st.s.rm, st.s.zgrid);
    ratios.push_back(r.norms.h2_h11() / data);

    // scattering of the reconstruction reproduces r+- within 10x the round-trip error
    const ScatteringData again = compute_scattering(make_field(st.u.grid, r.u_rec), st.s.zgrid);
    const double dp = (again.rp - st.s.rp).abs().maxCoeff() / st.s.rp.abs().maxCoeff();
    const double dm = (again.rm - st.s.rm).abs().maxCoeff() / st.s.rm.abs().maxCoeff();
    MESSAGE("A = " << A << ": round trip " << err << ", re-scatter " << dp << ", " << dm << ", norm ratio "
                   << ratios.back());
    CHECK(dp <= 10.0 * err);
    CHECK(dm <= 10.0 * err);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi <= 2.0 * *lo);
}

TEST_CASE("threaded sweep is bit-identical to the serial one") {
  const Setup st = setup(0.3, 20, 512, 16, 1024);
  const ReconstructionResult a = reconstruct_field(st.s, &st.deltas, st.u.grid, st.plan, threaded(1));
  const ReconstructionResult b = reconstruct_field(st.s, &st.deltas, st.u.grid, st.plan, threaded(3));
  CHECK((a.u_rec - b.u_rec).abs().maxCoeff() == 0.0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("per-node failures are aggregated") {
  const Setup st = setup(0.3, 20, 512, 16, 1024);
  ReconstructionOptions o = threaded(2);
  o.rh.tol = 1e-30;
  o.rh.max_iter = 3;
  CHECK_THROWS_AS(reconstruct_nodes(st.refl, st.plan, st.u.grid, {100, 300, 400}, o), NumericalError);
}
