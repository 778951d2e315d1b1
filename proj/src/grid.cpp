#include "nlsgi/grid.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nlsgi/fourier.hpp"

namespace nlsgi {

RArray SpatialGrid::nodes() const {
  RArray x(count);
  for (Index j = 0; j < count; ++j) x[j] = node(j);
  return x;
}

RArray SpectralGrid::nodes() const {
  RArray z(count);
  for (Index m = 0; m < count; ++m) z[m] = node(m);
  return z;
}

Complex branch_k(double z) {
  return z > 0 ? Complex(std::sqrt(z), 0.0) : Complex(0.0, std::sqrt(-z));
}

CArray SpectralGrid::branch() const {
  CArray k(count);
  for (Index m = 0; m < count; ++m) k[m] = branch_k(node(m));
  return k;
}

void validate(const SpatialGrid& g) {
  if (!(g.half_width > 0) || !std::isfinite(g.half_width)) throw InputError("L must be positive");
  if (g.count < 8) throw InputError("N must be at least 8");
  if (g.count % 2 != 0) throw InputError("N must be even so that x = 0 is a grid node");
}

void validate(const SpectralGrid& g) {
  if (!(g.half_width > 0) || !std::isfinite(g.half_width)) throw InputError("Z must be positive");
  if (g.count < 8) throw InputError("M must be at least 8");
}

std::pair<SpatialGrid, SpectralGrid> make_grids(double L, Index N, double Z, Index M) {
  SpatialGrid xg{L, N};
  SpectralGrid zg{Z, M};
  validate(xg);
  validate(zg);
  return {xg, zg};
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw InputError(where + ": not a number: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct CsvSamples {
  std::vector<double> x;
  std::vector<Complex> u;
};

CsvSamples read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,re_u,im_u") throw InputError(path.string() + ":1: expected header x,re_u,im_u");
  CsvSamples s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    auto f = split(line, ',');
    if (f.size() != 3) throw InputError(where + ": expected 3 fields");
    s.x.push_back(parse_double(f[0], where));
    s.u.emplace_back(parse_double(f[1], where), parse_double(f[2], where));
  }
  if (s.x.size() < 2) throw InputError(path.string() + ": need at least two rows");
  return s;
}

// Trigonometric interpolant of periodic samples on [x0, x0 + n h), zero outside.
CArray band_limited_resample(const CsvSamples& s, double h, const SpatialGrid& grid) {
  const Index n = static_cast<Index>(s.u.size());
  CArray f(n);
  for (Index i = 0; i < n; ++i) f[i] = s.u[static_cast<size_t>(i)];
  CArray c;
  Fft fft(n);
  fft.forward(f, c);
  c /= static_cast<double>(n);
  const double x0 = s.x.front(), period = static_cast<double>(n) * h;
  const double base = 2.0 * pi / period;
  CArray out = CArray::Zero(grid.count);
  for (Index j = 0; j < grid.count; ++j) {
    const double x = grid.node(j);
    if (x < x0 - 1e-12 || x > x0 + (static_cast<double>(n) - 1) * h + 1e-12) continue;
    Complex acc = 0;
    for (Index m = 0; m < n; ++m) {
      Index mm = m < (n + 1) / 2 ? m : m - n;
      const double arg = base * static_cast<double>(mm) * (x - x0);
      if (n % 2 == 0 && m == n / 2)
        acc += c[m] * std::cos(arg);
      else
        acc += c[m] * Complex(std::cos(arg), std::sin(arg));
    }
    out[j] = acc;
  }
  return out;
}

CArray load_csv_potential(const std::filesystem::path& path, const SpatialGrid& grid) {
  CsvSamples s = read_csv(path);
  const size_t n = s.x.size();
  const double h = (s.x.back() - s.x.front()) / static_cast<double>(n - 1);
  if (!(h > 0)) throw InputError(path.string() + ": x must be ascending");
  for (size_t i = 1; i < n; ++i) {
    if (std::abs((s.x[i] - s.x[i - 1]) - h) > 1e-6 * h)
      throw InputError(path.string() + ":" + std::to_string(i + 2) + ": x is not ascending and uniform");
  }
  const double dx = grid.spacing();
  if (std::abs(h - dx) <= 1e-9 * dx) {
    // same resolution: the file must be this grid, not a truncated copy
    if (static_cast<Index>(n) != grid.count)
      throw InputError(path.string() + ": row count " + std::to_string(n) + " does not match N = " +
                       std::to_string(grid.count));
    if (std::abs(s.x.front() - grid.node(0)) > 1e-6 * dx)
      throw InputError(path.string() + ": first x does not match -L");
    CArray u(grid.count);
    for (Index j = 0; j < grid.count; ++j) u[j] = s.u[static_cast<size_t>(j)];
    return u;
  }
  return band_limited_resample(s, h, grid);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PotentialSpec parse_potential_spec(const std::string& text) {
  auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head == "zero" && colon == std::string::npos) return ZeroPreset{};
  if (head != "sech" && head != "gaussian") return std::filesystem::path(text);
  SechPreset sech;
  GaussianPreset gauss;
  if (colon != std::string::npos) {
    for (auto item : split(std::string_view(text).substr(colon + 1), ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw InputError("preset parameter without '=': " + std::string(item));
      const std::string key(item.substr(0, eq));
      const double v = parse_double(item.substr(eq + 1), "preset " + head);
      if (head == "sech" && key == "A") sech.amplitude = v;
      else if (head == "sech" && key == "x0") sech.center = v;
      else if (head == "sech" && key == "phase") sech.phase = v;
      else if (head == "gaussian" && key == "A") gauss.amplitude = v;
      else if (head == "gaussian" && key == "sigma") gauss.sigma = v;
      else throw InputError("unknown parameter '" + key + "' for preset " + head);
    }
  }
  if (head == "gaussian") {
    if (!(gauss.sigma > 0)) throw InputError("gaussian sigma must be positive");
    return gauss;
  }
  return sech;
}

std::string to_string(const PotentialSpec& spec) {
  struct V {
    std::string operator()(const SechPreset& s) const {
      return "sech:A=" + fmt(s.amplitude) + ",x0=" + fmt(s.center) + ",phase=" + fmt(s.phase);
    }
    std::string operator()(const GaussianPreset& g) const {
      return "gaussian:A=" + fmt(g.amplitude) + ",sigma=" + fmt(g.sigma);
    }
    std::string operator()(const ZeroPreset&) const { return "zero"; }
    std::string operator()(const std::filesystem::path& p) const { return p.string(); }
  };
  return std::visit(V{}, spec);
}

CArray compute_w(const CArray& u, const SpatialGrid& grid) {
  if (u.size() != grid.count) throw InputError("u length does not match the grid");
  const CArray ux = spectral_derivative(u, grid.spacing(), 1);
  return -I * ux + 2.0 * u - 0.5 * u.abs2().cast<Complex>() * u;
}

PotentialField make_field(const SpatialGrid& grid, CArray u, double boundary_tol) {
  validate(grid);
  if (u.size() != grid.count) throw InputError("u length does not match the grid");
  if (!u.allFinite()) throw InputError("potential contains non-finite samples");
  PotentialField f;
  f.grid = grid;
  f.u = std::move(u);
  f.w = compute_w(f.u, grid);
  // the periodic extension closes x_N = L onto x_0 = -L, so x_0 is both ends
  f.boundary_max = std::max(std::abs(f.u[0]), std::abs(f.u[1]));
  f.boundary_max = std::max(f.boundary_max, std::abs(f.u[grid.count - 1]));
  f.decay_ok = f.boundary_max <= boundary_tol;
  if (!f.decay_ok)
    f.warnings.push_back("potential does not decay at the grid boundary: max |u(+-L)| = " + fmt(f.boundary_max));
  return f;
}

PotentialField sample_potential(const PotentialSpec& spec, const SpatialGrid& grid, double boundary_tol) {
  validate(grid);
  const RArray x = grid.nodes();
  CArray u;
  if (auto* s = std::get_if<SechPreset>(&spec)) {
    const Complex ph = std::polar(1.0, s->phase);
    u = ((x - s->center).cosh().inverse() * s->amplitude).cast<Complex>() * ph;
  } else if (auto* g = std::get_if<GaussianPreset>(&spec)) {
    u = ((-(x * x) / (2.0 * g->sigma * g->sigma)).exp() * g->amplitude).cast<Complex>();
  } else if (std::holds_alternative<ZeroPreset>(spec)) {
    u = CArray::Zero(grid.count);
  } else {
    u = load_csv_potential(std::get<std::filesystem::path>(spec), grid);
  }
  return make_field(grid, std::move(u), boundary_tol);
}

NormReport norms(const PotentialField& u) { return norms(u.u, u.grid); }

NormReport norms(const CArray& u, const SpatialGrid& grid) {
  const double h = grid.spacing();
  const RArray x = grid.nodes();
  const RArray weight2 = 1.0 + x * x;  // <x>^2
  Fft fft(grid.count);
  const CArray ux = spectral_derivative(u, h, 1, fft);
  const CArray uxx = spectral_derivative(u, h, 2, fft);
  const double u2 = u.abs2().sum() * h, ux2 = ux.abs2().sum() * h, uxx2 = uxx.abs2().sum() * h;
  NormReport r;
  r.L1 = u.abs().sum() * h;
  r.L2 = std::sqrt(u2);
  r.L21 = std::sqrt((weight2 * u.abs2()).sum() * h);
  r.H1 = std::sqrt(u2 + ux2);
  r.H2 = std::sqrt(u2 + ux2 + uxx2);
  r.H11 = std::sqrt((weight2 * (u.abs2() + ux.abs2())).sum() * h);
  return r;
}

double h1_l21_norm(const CArray& f, const SpectralGrid& grid) {
  const double h = grid.spacing();
  const RArray z = grid.nodes();
  const CArray fz = spectral_derivative(f, h, 1);
  const double h1 = std::sqrt((f.abs2().sum() + fz.abs2().sum()) * h);
  const double l21 = std::sqrt(((1.0 + z * z) * f.abs2()).sum() * h);
  return h1 + l21;
}

}  // namespace nlsgi
