#include <doctest.h>

#include "nlsgi/direct_scattering.hpp"
#include "oracles.hpp"

using namespace nlsgi;

namespace {

PotentialField sech_field(double A, double L = 20, Index N = 2048) {
  return sample_potential(SechPreset{A, 0, 0}, SpatialGrid{L, N});
}

// |W1| = sqrt(|u|^2/4 + |w|^2) for u = A sech x, w = -i u' + 2u - u^3/2
double w1_l1_quadrature(double A, double L) {
  auto f = [A](double x) {
    const double u = A * oracle::sech(x), ux = -u * std::tanh(x);
    const double re = 2.0 * u - 0.5 * u * u * u;
    return std::sqrt(0.25 * u * u + re * re + ux * ux);
  };
  return oracle::integrate_panels(f, -L, L);
}

double u_l1_quadrature(double A, double L) {
  return oracle::integrate_panels([A](double x) { return A * oracle::sech(x); }, -L, L);
}

}  // namespace

TEST_CASE("zero potential: Jost fields are the boundary vectors, a = 1, b = 0") {
  PotentialField u = sample_potential(ZeroPreset{}, SpatialGrid{20, 512});
  SpectralGrid zg{10, 64};
  for (JostKind k : {JostKind::m_plus, JostKind::m_minus, JostKind::n_plus, JostKind::n_minus}) {
    JostField f = solve_jost(u, zg, k);
    const bool is_m = k == JostKind::m_plus || k == JostKind::m_minus;
    CHECK((f.first - Complex(is_m ? 1.0 : 0.0)).abs().maxCoeff() == 0.0);
    CHECK((f.second - Complex(is_m ? 0.0 : 1.0)).abs().maxCoeff() == 0.0);
    CHECK(f.sup_deviation.maxCoeff() == 0.0);
  }
  ScatteringData s = compute_scattering(u, zg);
  CHECK((s.a - 1.0).abs().maxCoeff() == 0.0);
  CHECK(s.b.abs().maxCoeff() == 0.0);
  CHECK(s.rp.abs().maxCoeff() == 0.0);
  CHECK(s.rm.abs().maxCoeff() == 0.0);
  CHECK(s.min_abs_a == 1.0);
  CHECK_NOTHROW(check_gate(s));
}

TEST_CASE("m+ deviation obeys the Neumann-series majorant") {
  PotentialField u = sech_field(0.3);
  SpectralGrid zg{40, 512};
  JostField m = solve_jost(u, zg, JostKind::m_plus, {StepperOrder::fourth, true});
  const double bound = std::exp(w1_l1_quadrature(0.3, 20)) - 1.0;
  CHECK(m.sup_deviation.maxCoeff() > 0.0);
  CHECK(m.sup_deviation.maxCoeff() <= bound);
}

TEST_CASE("second-order large-z remainder decays when Z doubles") {
  const double A = 0.3;
  PotentialField u = sech_field(A, 20, 4096);
  // q+(0) = -1/2 int_0^inf u conj(w), w(0) = 2A - A^3/2
  const oracle::cd integral = oracle::integrate_panels(
      [A](double x) {
        const double uu = A * oracle::sech(x), ux = -uu * std::tanh(x);
        return oracle::cd(uu * (2.0 * uu - 0.5 * uu * uu * uu), uu * ux);
      },
      0.0, 40.0);
  const Complex q0 = -0.5 * integral;
  const Complex w0 = 2.0 * A - 0.5 * A * A * A;
  auto remainder_at_ends = [&](double Z) {
    SpectralGrid zg{Z, 64};
    JostField m = solve_jost(u, zg, JostKind::m_plus);
    double worst = 0;
    for (Index i : {Index{0}, zg.count - 1}) {
      const double z = zg.node(i);
      const Complex r1 = 2.0 * I * z * (m.first[i] - 1.0) + q0;
      const Complex r2 = 2.0 * I * z * m.second[i] + std::conj(w0);
      worst = std::max(worst, std::sqrt(std::norm(r1) + std::norm(r2)));
    }
    return worst;
  };
  const double r40 = remainder_at_ends(40), r80 = remainder_at_ends(80);
  MESSAGE("remainder Z=40: " << r40 << ", Z=80: " << r80);
  CHECK(r40 / r80 >= 1.8);

  // the library q is a cumulative trapezoid, second order on the half line
  JostAsymptotics q = compute_asymptotics(u);
  CHECK(std::abs(q.q_plus[u.grid.origin_index()] - q0) < 1e-6);
  const Complex diff = q.q_plus[100] - q.q_minus[100];
  CHECK(std::abs((q.q_plus[3000] - q.q_minus[3000]) - diff) < 1e-14);
}

TEST_CASE("unitarity at the default grid") {
  ScatteringData s = compute_scattering(sech_field(0.3), SpectralGrid{40, 4096});
  double pos = 0, neg = 0;
  for (Index m = 0; m < s.zgrid.count; ++m) {
    const double a2 = std::norm(s.a[m]), b2 = std::norm(s.b[m]);
    if (s.zgrid.node(m) > 0) pos = std::max(pos, std::abs(a2 + b2 - 1.0));
    else neg = std::max(neg, std::abs(a2 - b2 - 1.0));
  }
  CHECK(pos <= 1e-6);
  CHECK(neg <= 1e-6);
  CHECK(s.unitarity_pos_err == doctest::Approx(pos));
  CHECK(s.unitarity_neg_err == doctest::Approx(neg));
  // r- = 4z r+ and 1 + conj(r+) r- = 1/|a|^2
  double rel = 0, pos_err = 0;
  for (Index m = 0; m < s.zgrid.count; ++m) {
    const double z = s.zgrid.node(m);
    rel = std::max(rel, std::abs(s.rm[m] - 4.0 * z * s.rp[m]) / std::max(1e-300, std::abs(s.rm[m])));
    const Complex v = 1.0 + std::conj(s.rp[m]) * s.rm[m];
    CHECK(v.real() > 0);
    pos_err = std::max(pos_err, std::abs(v - 1.0 / std::norm(s.a[m])));
  }
  CHECK(rel < 1e-12);
  CHECK(pos_err < 1e-5);
}

TEST_CASE("unitarity error shrinks under refinement, both stepper orders") {
  for (StepperOrder order : {StepperOrder::second, StepperOrder::fourth}) {
    ScatteringOptions o;
    o.jost.order = order;
    const double coarse = compute_scattering(sech_field(0.3, 20, 1024), SpectralGrid{20, 1024}, o).unitarity_max_err;
    const double fine = compute_scattering(sech_field(0.3, 20, 2048), SpectralGrid{20, 2048}, o).unitarity_max_err;
    MESSAGE("order " << static_cast<int>(order) << ": " << coarse << " -> " << fine);
    CHECK(coarse / fine >= 2.0);
    if (order == StepperOrder::second) CHECK(coarse / fine >= 3.0);
  }
}

TEST_CASE("parity: a even and b odd under k -> -k") {
  PotentialField u = sech_field(0.3);
  SpectralGrid zg{40, 1024};
  JostField mm = solve_jost(u, zg, JostKind::m_minus);
  JostField mp = solve_jost(u, zg, JostKind::m_plus);
  JostField np = n_from_m(mp);
  ScatteringData s = scattering_ab(mm, mp, np, u.u[u.grid.origin_index()]);
  const Complex u0 = u.u[u.grid.origin_index()];
  double a_dev = 0, b_dev = 0;
  for (Index m = 0; m < zg.count; ++m) {
    const double z = zg.node(m);
    if (z <= 0) continue;
    for (double sgn : {1.0, -1.0}) {
      const Complex k = sgn * std::sqrt(z);
      // a depends on k only through z = k^2
      const Complex a = mm.first[m] * np.second[m] +
                        (mm.second[m] - I * std::conj(u0) * mm.first[m]) * (np.first[m] + I * u0 * np.second[m]) / (4.0 * k * k);
      const Complex b = (mp.first[m] * mm.second[m] - mm.first[m] * mp.second[m]) / (2.0 * k);
      a_dev = std::max(a_dev, std::abs(a - s.a[m]) / std::abs(s.a[m]));
      b_dev = std::max(b_dev, std::abs(b - sgn * s.b[m]) / std::max(1e-300, std::abs(s.b[m])));
    }
  }
  CHECK(a_dev <= 1e-10);
  CHECK(b_dev <= 1e-10);
  CHECK(s.parity_err <= 1e-10);
}

TEST_CASE("first Born term for a small sech") {
  const double A = 1e-3;
  ScatteringData s = compute_scattering(sech_field(A), SpectralGrid{40, 4096});
  double err = 0, scale = 0, closed_dev = 0;
  for (Index m = 0; m < s.zgrid.count; m += 8) {
    const double z = s.zgrid.node(m), lam = z + 1;
    if (std::abs(lam) > 3) continue;
    const oracle::cd ft = oracle::integrate_panels(
        [&](double y) { return std::polar(A * oracle::sech(y), -2.0 * lam * y); }, -20.0, 20.0);
    closed_dev = std::max(closed_dev, std::abs(ft - A * pi / std::cosh(pi * lam)));
    const Complex born = -s.k[m] * ft;
    err = std::max(err, std::abs(s.b[m] - born));
    scale = std::max(scale, std::abs(born));
  }
  CHECK(closed_dev < 1e-11);
  MESSAGE("Born relative error " << err / scale);
  CHECK(err / scale <= 1e-4);
}

TEST_CASE("Wronskian a agrees with the integral representation") {
  PotentialField u = sech_field(0.3);
  SpectralGrid zg{40, 256};
  JostOptions o;
  o.full_line = true;
  o.keep_field = true;
  JostField mm = solve_jost(u, zg, JostKind::m_minus, o);
  ScatteringData s = compute_scattering(u, zg);
  const CArray ai = a_from_integral(u, mm);
  CHECK((ai - s.a).abs().maxCoeff() < 1e-6);
}

TEST_CASE("large-z decay of a - 1") {
  PotentialField u = sech_field(0.3, 20, 4096);
  auto end_dev = [&](double Z) {
    ScatteringData s = compute_scattering(u, SpectralGrid{Z, 64});
    return std::max(std::abs(s.a[0] - 1.0), std::abs(s.a[63] - 1.0));
  };
  const double d40 = end_dev(40), d80 = end_dev(80);
  MESSAGE("|a-1| Z=40: " << d40 << ", Z=80: " << d80);
  CHECK(d40 / d80 >= 1.8);
}

TEST_CASE("n+ by direct solve matches the conjugation symmetry") {
  PotentialField u = sech_field(0.3);
  SpectralGrid zg{40, 512};
  ScatteringOptions direct;
  direct.direct_n = true;
  ScatteringData a = compute_scattering(u, zg);
  ScatteringData b = compute_scattering(u, zg, direct);
  CHECK((a.a - b.a).abs().maxCoeff() < 1e-9);
  CHECK((a.b - b.b).abs().maxCoeff() < 1e-9);
}

TEST_CASE("soliton-free bound") {
  CHECK(soliton_free_bound(sample_potential(ZeroPreset{}, SpatialGrid{20, 256})) == 1.0);

  PotentialField u = sech_field(0.1);
  const double oracle_bound = 1.0 - 0.5 * u_l1_quadrature(0.1, 20) * std::exp(w1_l1_quadrature(0.1, 20));
  const double bound = soliton_free_bound(u);
  CHECK(std::abs(bound - oracle_bound) < 1e-8);
  ScatteringData s = compute_scattering(u, SpectralGrid{40, 4096});
  CHECK(bound <= s.min_abs_a + 1e-6);

  PotentialField big = sech_field(5.0);
  CHECK(soliton_free_bound(big) < 0);
  CHECK(1.0 - 0.5 * u_l1_quadrature(5, 20) * std::exp(w1_l1_quadrature(5, 20)) < 0);
}

TEST_CASE("gate refuses potentials with solitons") {
  ScatteringData s = compute_scattering(sech_field(5.0), SpectralGrid{40, 4096});
  CHECK(s.zero_count != 0.0);
  CHECK_THROWS_AS(check_gate(s), SolitonGateError);
  try {
    check_gate(s);
  } catch (const SolitonGateError& e) {
    CHECK(e.zero_count == s.zero_count);
  }
  // a tiny min|a| alone also trips the gate
  ScatteringData t = compute_scattering(sech_field(0.3), SpectralGrid{40, 256});
  CHECK_THROWS_AS(check_gate(t, 2.0), SolitonGateError);
}

TEST_CASE("too coarse a spatial step for the spectral window is refused") {
  PotentialField u = sech_field(0.3);
  CHECK_THROWS_AS(solve_jost(u, SpectralGrid{200, 256}, JostKind::m_plus), NumericalError);
}

TEST_CASE("threaded z-loop is bit-identical") {
  PotentialField u = sech_field(0.3);
  SpectralGrid zg{40, 512};
  ScatteringOptions o4;
  o4.jost.threads = 4;
  ScatteringData a = compute_scattering(u, zg);
  ScatteringData b = compute_scattering(u, zg, o4);
  CHECK((a.a - b.a).abs().maxCoeff() == 0.0);
  CHECK((a.b - b.b).abs().maxCoeff() == 0.0);
}

TEST_CASE("winding number") {
  CArray one = CArray::Constant(16, 1.0);
  CHECK(winding_number(one) == 0.0);
  CArray loop(64);
  for (Index i = 0; i < 64; ++i) loop[i] = std::polar(0.5, 2 * pi * (static_cast<double>(i) + 0.5) / 64.0);
  CHECK(std::abs(winding_number(loop) - 1.0) < 1e-12);
}
