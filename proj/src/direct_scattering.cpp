#include "nlsgi/direct_scattering.hpp"

#include <array>
#include <sstream>

#include "nlsgi/fourier.hpp"
#include "nlsgi/parallel.hpp"

namespace nlsgi {

const char* to_string(JostKind k) {
  switch (k) {
    case JostKind::m_plus: return "m+";
    case JostKind::m_minus: return "m-";
    case JostKind::n_plus: return "n+";
    case JostKind::n_minus: return "n-";
  }
  return "?";
}

namespace {

// I_n(c) = int_0^1 e^{c(1-t)} t^n dt for n = 0..3
std::array<Complex, 4> phase_moments(Complex c) {
  std::array<Complex, 4> in{};
  if (std::abs(c) < 1.0) {
    // sum_m c^m n! / (m+n+1)!
    for (int n = 0; n < 4; ++n) {
      double nfact = 1;
      for (int i = 2; i <= n; ++i) nfact *= i;
      double denom = 1;
      for (int i = 2; i <= n + 1; ++i) denom *= i;
      Complex term = nfact / denom, acc = 0;
      for (int m = 0; m < 40; ++m) {
        acc += term;
        term *= c / static_cast<double>(m + n + 2);
      }
      in[static_cast<size_t>(n)] = acc;
    }
  } else {
    in[0] = (std::exp(c) - 1.0) / c;
    for (int n = 1; n < 4; ++n) in[static_cast<size_t>(n)] = (-1.0 + static_cast<double>(n) * in[static_cast<size_t>(n - 1)]) / c;
  }
  return in;
}

// Coefficients of ys' = A yf, yf' = kappa yf + B ys along the grid.
struct Coupling {
  CArray A, B, dA, dB;  // indexed by grid node 0..N-1, periodic
};

Coupling coupling_for(const PotentialField& f, bool m_type) {
  const double h = f.grid.spacing();
  Fft fft(f.grid.count);
  const CArray ux = spectral_derivative(f.u, h, 1, fft);
  const CArray wx = spectral_derivative(f.w, h, 1, fft);
  Coupling c;
  if (m_type) {
    c.A = 0.5 * f.u;
    c.dA = 0.5 * ux;
    c.B = f.w.conjugate();
    c.dB = wx.conjugate();
  } else {
    c.A = 0.5 * f.u.conjugate();
    c.dA = 0.5 * ux.conjugate();
    c.B = f.w;
    c.dB = wx;
  }
  return c;
}

struct LineResult {
  Complex slow0, fast0, slow_end, fast_end;
  double sup_dev;
};

// Integrates from the start end toward x = 0 (and on to the other end when
// full_line). Forward runs from node 0; backward runs from node N = 0 (mod N).
template <class Record>
LineResult integrate_line(const Coupling& cp, Index N, double dx, Complex kappa, bool forward, StepperOrder order,
                          bool full_line, Record&& record) {
  const double h = forward ? dx : -dx;
  const Complex c = kappa * h;
  const Complex E = std::exp(c);
  const auto in = phase_moments(c);
  const Complex a0 = 2.0 * in[3] - 3.0 * in[2] + in[0], b0 = in[3] - 2.0 * in[2] + in[1];
  const Complex a1 = -2.0 * in[3] + 3.0 * in[2], b1 = in[3] - in[2];
  const Complex p0 = in[0] - in[1], p1 = in[1];
  const double h2 = h * h;

  Complex ys = 1.0, yf = 0.0;
  LineResult res{};
  double sup2 = 0.0;
  const Index steps = full_line ? N : N / 2;
  Index j = forward ? 0 : N;
  record(j, ys, yf);
  for (Index s = 0; s < steps; ++s) {
    const Index j1 = forward ? j + 1 : j - 1;
    const Index i0 = j % N, i1 = j1 % N;
    const Complex A0 = cp.A[i0], B0 = cp.B[i0], A1 = cp.A[i1], B1 = cp.B[i1];
    Complex c11, c12, c21, c22, rs, rf;
    if (order == StepperOrder::fourth) {
      const Complex dA0 = cp.dA[i0], dB0 = cp.dB[i0], dA1 = cp.dA[i1], dB1 = cp.dB[i1];
      const Complex f0 = A0 * yf;
      const Complex df0 = dA0 * yf + A0 * (kappa * yf + B0 * ys);
      const Complex g0 = B0 * ys;
      const Complex dg0 = dB0 * ys + B0 * A0 * yf;
      rs = ys + 0.5 * h * f0 + h2 / 12.0 * df0;
      rf = E * yf + h * (a0 * g0 + h * b0 * dg0);
      c11 = 1.0 + h2 / 12.0 * A1 * B1;
      c12 = -(0.5 * h * A1 - h2 / 12.0 * (dA1 + A1 * kappa));
      c21 = -h * (a1 * B1 + h * b1 * dB1);
      c22 = 1.0 - h2 * b1 * B1 * A1;
    } else {
      rs = ys + 0.5 * h * A0 * yf;
      rf = E * yf + h * p0 * B0 * ys;
      c11 = 1.0;
      c12 = -0.5 * h * A1;
      c21 = -h * p1 * B1;
      c22 = 1.0;
    }
    const Complex det = c11 * c22 - c12 * c21;
    ys = (c22 * rs - c12 * rf) / det;
    yf = (c11 * rf - c21 * rs) / det;
    j = j1;
    record(j, ys, yf);
    sup2 = std::max(sup2, std::norm(ys - 1.0) + std::norm(yf));
    if (s + 1 == N / 2) {
      res.slow0 = ys;
      res.fast0 = yf;
    }
  }
  res.slow_end = ys;
  res.fast_end = yf;
  res.sup_dev = std::sqrt(sup2);
  return res;
}

}  // namespace

JostField solve_jost(const PotentialField& u, const SpectralGrid& zgrid, JostKind which, const JostOptions& opts) {
  validate(zgrid);
  const SpatialGrid& g = u.grid;
  const Index N = g.count, M = zgrid.count;
  const double dx = g.spacing();
  const bool m_type = which == JostKind::m_plus || which == JostKind::m_minus;
  const bool forward = which == JostKind::m_minus || which == JostKind::n_minus;

  // exact phase per cell still needs the coupling resolved against the kernel
  const double zmax = std::max(std::abs(zgrid.node(0)), std::abs(zgrid.node(M - 1)));
  const double phase_step = 2.0 * (zmax + 1.0) * dx;
  if (phase_step > pi) {
    std::ostringstream os;
    os << "ill-conditioned Volterra step: 2|z+1|dx = " << phase_step << " > pi at |z| = " << zmax
       << "; use a finer spatial grid (N >= " << static_cast<Index>(std::ceil(2.0 * (zmax + 1.0) * 2.0 * g.half_width / pi))
       << ") or a smaller Z";
    throw NumericalError(os.str());
  }

  const Coupling cp = coupling_for(u, m_type);
  JostField out;
  out.which = which;
  out.zgrid = zgrid;
  out.first.resize(M);
  out.second.resize(M);
  out.sup_deviation.resize(M);
  if (opts.full_line) {
    out.far_first.resize(M);
    out.far_second.resize(M);
  }
  if (opts.keep_field) {
    out.field_first.resize(N + 1, M);
    out.field_second.resize(N + 1, M);
  }

  parallel_for(M, opts.threads, [&](Index m, int) {
    const double lambda = zgrid.node(m) + 1.0;
    const Complex kappa = (m_type ? 2.0 : -2.0) * I * lambda;
    auto record = [&](Index j, Complex ys, Complex yf) {
      if (!opts.keep_field) return;
      out.field_first(j, m) = m_type ? ys : yf;
      out.field_second(j, m) = m_type ? yf : ys;
    };
    const LineResult r = integrate_line(cp, N, dx, kappa, forward, opts.order, opts.full_line, record);
    if (!std::isfinite(std::abs(r.slow_end)) || !std::isfinite(std::abs(r.fast_end))) {
      std::ostringstream os;
      os << "Volterra stepper produced non-finite values for " << to_string(which) << " at z = " << zgrid.node(m);
      throw NumericalError(os.str());
    }
    // slow component is m1 for m, n2 for n
    out.first[m] = m_type ? r.slow0 : r.fast0;
    out.second[m] = m_type ? r.fast0 : r.slow0;
    if (opts.full_line) {
      out.far_first[m] = m_type ? r.slow_end : r.fast_end;
      out.far_second[m] = m_type ? r.fast_end : r.slow_end;
    }
    out.sup_deviation[m] = r.sup_dev;
  });
  return out;
}

JostField n_from_m(const JostField& m) {
  JostField n = m;
  n.which = m.which == JostKind::m_plus ? JostKind::n_plus : JostKind::n_minus;
  if (m.which != JostKind::m_plus && m.which != JostKind::m_minus) throw InputError("n_from_m expects an m field");
  n.first = m.second.conjugate();
  n.second = m.first.conjugate();
  if (m.far_first.size()) {
    n.far_first = m.far_second.conjugate();
    n.far_second = m.far_first.conjugate();
  }
  if (m.field_first.size()) {
    n.field_first = m.field_second.conjugate();
    n.field_second = m.field_first.conjugate();
  }
  return n;
}

ScatteringData scattering_ab(const JostField& m_minus, const JostField& m_plus, const JostField& n_plus, Complex u0) {
  if (m_minus.which != JostKind::m_minus || m_plus.which != JostKind::m_plus || n_plus.which != JostKind::n_plus)
    throw InputError("scattering_ab expects (m-, m+, n+)");
  const SpectralGrid& zg = m_minus.zgrid;
  if (m_plus.zgrid.count != zg.count || n_plus.zgrid.count != zg.count)
    throw InputError("Jost fields were solved on different spectral grids");
  ScatteringData s;
  s.zgrid = zg;
  s.k = zg.branch();
  const RArray z = zg.nodes();
  const Index M = zg.count;
  s.a.resize(M);
  s.b.resize(M);
  for (Index m = 0; m < M; ++m) {
    const Complex mm1 = m_minus.first[m], mm2 = m_minus.second[m];
    const Complex mp1 = m_plus.first[m], mp2 = m_plus.second[m];
    const Complex np1 = n_plus.first[m], np2 = n_plus.second[m];
    s.a[m] = mm1 * np2 + (mm2 - I * std::conj(u0) * mm1) * (np1 + I * u0 * np2) / (4.0 * z[m]);
    s.b[m] = (mp1 * mm2 - mm1 * mp2) / (2.0 * s.k[m]);
  }
  finalize_scattering(s);
  return s;
}

double winding_number(const CArray& a) {
  double total = 0.0;
  const Index M = a.size();
  for (Index m = 0; m + 1 < M; ++m) total += std::arg(a[m + 1] / a[m]);
  total += std::arg(a[0] / a[M - 1]);
  return total / (2.0 * pi);
}

void finalize_scattering(ScatteringData& s) {
  const SpectralGrid& zg = s.zgrid;
  const Index M = zg.count;
  if (s.a.size() != M || s.b.size() != M) throw InputError("scattering arrays do not match the spectral grid");
  s.k = zg.branch();
  s.r = s.b / s.a;
  s.rp = s.r / (2.0 * s.k);
  s.rm = 2.0 * s.k * s.r;
  s.min_abs_a = s.a.abs().minCoeff();
  s.unitarity_pos_err = 0.0;
  s.unitarity_neg_err = 0.0;
  s.parity_err = 0.0;
  for (Index m = 0; m < M; ++m) {
    const double a2 = std::norm(s.a[m]), b2 = std::norm(s.b[m]);
    if (zg.node(m) > 0)
      s.unitarity_pos_err = std::max(s.unitarity_pos_err, std::abs(a2 + b2 - 1.0));
    else
      s.unitarity_neg_err = std::max(s.unitarity_neg_err, std::abs(a2 - b2 - 1.0));
    // b through the other branch -k; 2kb is the branch-free Wronskian
    const Complex flipped = (2.0 * s.k[m] * s.b[m]) / (-2.0 * s.k[m]);
    const double scale = std::max(std::abs(s.b[m]), 1e-300);
    s.parity_err = std::max(s.parity_err, std::abs(flipped + s.b[m]) / scale);
  }
  s.unitarity_max_err = std::max(s.unitarity_pos_err, s.unitarity_neg_err);
  s.zero_count = winding_number(s.a);
}

ScatteringData compute_scattering(const PotentialField& u, const SpectralGrid& zgrid, const ScatteringOptions& opts) {
  const JostField mm = solve_jost(u, zgrid, JostKind::m_minus, opts.jost);
  const JostField mp = solve_jost(u, zgrid, JostKind::m_plus, opts.jost);
  const JostField np = opts.direct_n ? solve_jost(u, zgrid, JostKind::n_plus, opts.jost) : n_from_m(mp);
  return scattering_ab(mm, mp, np, u.u[u.grid.origin_index()]);
}

void check_gate(const ScatteringData& s, double gate_tol) {
  const long zeros = std::lround(s.zero_count);
  if (s.min_abs_a <= gate_tol || zeros != 0) {
    std::ostringstream os;
    os << "soliton-free gate failed: min|a| = " << s.min_abs_a << " (gate_tol " << gate_tol
       << "), zeros of a in the upper half plane = " << zeros
       << "; eigenvalues or resonances suspected, inversion refused";
    throw SolitonGateError(os.str(), s.min_abs_a, s.zero_count);
  }
}

double soliton_free_bound(const PotentialField& u) {
  const double h = u.grid.spacing();
  const double l1 = u.u.abs().sum() * h;
  const double w1 = (0.25 * u.u.abs2() + u.w.abs2()).sqrt().sum() * h;
  return 1.0 - 0.5 * l1 * std::exp(w1);
}

JostAsymptotics compute_asymptotics(const PotentialField& u) {
  const Index N = u.grid.count;
  const double h = u.grid.spacing();
  const CArray g = u.u * u.w.conjugate();
  JostAsymptotics q;
  q.q_minus.resize(N);
  q.q_plus.resize(N);
  // cumulative trapezoid; the integrand vanishes at both ends
  Complex acc = 0.0;
  q.q_minus[0] = 0.0;
  for (Index j = 1; j < N; ++j) {
    acc += 0.5 * h * (g[j - 1] + g[j]);
    q.q_minus[j] = 0.5 * acc;
  }
  const Complex total = 0.5 * (acc + 0.5 * h * (g[N - 1] + g[0]));
  q.q_plus = q.q_minus - total;
  return q;
}

RArray second_order_remainder(const JostField& m, const JostAsymptotics& q, const PotentialField& u) {
  if (m.which != JostKind::m_plus && m.which != JostKind::m_minus) throw InputError("expects an m field");
  const Index j0 = u.grid.origin_index();
  const Complex q0 = m.which == JostKind::m_plus ? q.q_plus[j0] : q.q_minus[j0];
  const Complex wb = std::conj(u.w[j0]);
  const RArray z = m.zgrid.nodes();
  RArray out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const Complex e1 = 2.0 * I * z[i] * (m.first[i] - 1.0) + q0;
    const Complex e2 = 2.0 * I * z[i] * m.second[i] + wb;
    out[i] = std::sqrt(std::norm(e1) + std::norm(e2));
  }
  return out;
}

CArray a_from_integral(const PotentialField& u, const JostField& m_minus_full) {
  if (m_minus_full.which != JostKind::m_minus || m_minus_full.field_second.rows() != u.grid.count + 1)
    throw InputError("a_from_integral needs the kept m- field");
  const Index N = u.grid.count;
  const double h = u.grid.spacing();
  CArray a = CArray::Ones(m_minus_full.zgrid.count);
  for (Index m = 0; m < a.size(); ++m) {
    Complex acc = 0.0;
    for (Index j = 0; j < N; ++j)
      acc += 0.5 * h * (u.u[j] * m_minus_full.field_second(j, m) + u.u[(j + 1) % N] * m_minus_full.field_second(j + 1, m));
    a[m] += 0.5 * acc;
  }
  return a;
}

}  // namespace nlsgi
