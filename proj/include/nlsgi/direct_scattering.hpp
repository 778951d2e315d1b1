#pragma once

#include "nlsgi/grid.hpp"

namespace nlsgi {

enum class JostKind { m_plus, m_minus, n_plus, n_minus };
enum class StepperOrder { second = 2, fourth = 4 };

const char* to_string(JostKind k);

struct JostOptions {
  StepperOrder order = StepperOrder::fourth;
  bool full_line = false;  // keep stepping past x = 0 to the opposite end
  bool keep_field = false;  // debug: store every (x, z) value
  int threads = 1;
};

// m solves m1' = (u/2) m2, m2' = 2i(z+1) m2 + conj(w) m1 and tends to e1;
// n solves n1' = -2i(z+1) n1 + w n2, n2' = conj(u)/2 n1 and tends to e2.
// In matrix form Q1 = [[0, u/2], [conj(w), 0]] for m and Q2 = [[0, w], [conj(u)/2, 0]] for n.
struct JostField {
  JostKind which = JostKind::m_plus;
  SpectralGrid zgrid;
  CArray first, second;  // components at x = 0
  CArray far_first, far_second;  // at the opposite grid end, full_line only
  RArray sup_deviation;  // sup over integrated x of |value - boundary vector|
  // keep_field only: row j is grid node j for j = 0..N (row N is x = +L)
  Eigen::MatrixXcd field_first, field_second;
};

JostField solve_jost(const PotentialField& u, const SpectralGrid& zgrid, JostKind which,
                     const JostOptions& opts = {});

// n = sigma1 conj(m) for real z; exact for the discrete scheme as well
JostField n_from_m(const JostField& m);

struct ScatteringData {
  SpectralGrid zgrid;
  CArray k, a, b, r, rp, rm;
  double min_abs_a = 1.0;
  double unitarity_pos_err = 0.0;  // max over z > 0 of ||a|^2 + |b|^2 - 1|
  double unitarity_neg_err = 0.0;  // max over z < 0 of ||a|^2 - |b|^2 - 1|
  double unitarity_max_err = 0.0;
  double parity_err = 0.0;  // max relative deviation under k -> -k
  double zero_count = 0.0;  // winding of a around 0 along the real z-line
};

// Wronskians at x = 0; u0 = u(0).
ScatteringData scattering_ab(const JostField& m_minus, const JostField& m_plus, const JostField& n_plus,
                             Complex u0);

// fills r, rp, rm and every diagnostic from zgrid, a, b
void finalize_scattering(ScatteringData& s);

struct ScatteringOptions {
  JostOptions jost;
  bool direct_n = false;  // solve n+ instead of using the conjugation symmetry
};

ScatteringData compute_scattering(const PotentialField& u, const SpectralGrid& zgrid,
                                  const ScatteringOptions& opts = {});

// Closed-polygon winding number of a along the z-grid (closed through a = 1
// at infinity); counts zeros of a in the upper half z-plane.
double winding_number(const CArray& a);

inline constexpr double default_gate_tol = 1e-3;

// throws SolitonGateError if min|a| <= gate_tol or a has zeros off the axis
void check_gate(const ScatteringData& s, double gate_tol = default_gate_tol);

// 1 - ||u||_1 exp(||W1||_1) / 2, |W1| the Frobenius norm of [[0, u/2], [conj(w), 0]]
double soliton_free_bound(const PotentialField& u);

struct JostAsymptotics {
  CArray q_plus, q_minus;  // q+(x) = 1/2 int_{+inf}^x u conj(w), q-(x) = 1/2 int_{-inf}^x u conj(w)
};

JostAsymptotics compute_asymptotics(const PotentialField& u);

// |2iz(m - e1) + q e1 + conj(w) e2| at x = 0 for each z node; O(1/|z|)
RArray second_order_remainder(const JostField& m, const JostAsymptotics& q, const PotentialField& u);

// a = 1 + 1/2 int u m-^(2) dx by trapezoid over a kept m- field
CArray a_from_integral(const PotentialField& u, const JostField& m_minus_full);

}  // namespace nlsgi
