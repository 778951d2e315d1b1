#include "nlsgi/fourier.hpp"

#include <mutex>

#include <unsupported/Eigen/FFT>

namespace nlsgi {

namespace {
// FFTW's planner is not reentrant; Eigen plans lazily on the first call.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

// The scratch buffers never move, so every execution sees the same
// alignment the plan was made with.
struct Fft::Impl {
  Eigen::FFT<double> fft;
  CArray src, dst;
};

Fft::Fft(Index n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 1) throw InputError("fft length must be positive");
  impl_->src = CArray::Zero(n);
  impl_->dst = CArray::Zero(n);
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->fft.fwd(impl_->dst.data(), impl_->src.data(), n);
  impl_->fft.inv(impl_->dst.data(), impl_->src.data(), n);
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(const CArray& in, CArray& out) {
  impl_->src = in;
  impl_->fft.fwd(impl_->dst.data(), impl_->src.data(), n_);
  out = impl_->dst;
}

void Fft::inverse(const CArray& in, CArray& out) {
  impl_->src = in;
  impl_->fft.inv(impl_->dst.data(), impl_->src.data(), n_);
  out = impl_->dst;
}

RArray fft_wavenumbers(Index n, double dx) {
  RArray k(n);
  const double base = 2.0 * pi / (static_cast<double>(n) * dx);
  for (Index m = 0; m < n; ++m) k[m] = base * static_cast<double>(m < (n + 1) / 2 ? m : m - n);
  // the Nyquist mode has no sign; zeroing it keeps derivatives of real data real
  if (n % 2 == 0) k[n / 2] = 0.0;
  return k;
}

CArray spectral_derivative(const CArray& f, double dx, int order) {
  Fft fft(f.size());
  return spectral_derivative(f, dx, order, fft);
}

CArray spectral_derivative(const CArray& f, double dx, int order, Fft& fft) {
  if (fft.size() != f.size()) throw InputError("fft length mismatch");
  CArray spec;
  fft.forward(f, spec);
  const RArray k = fft_wavenumbers(f.size(), dx);
  if (order == 1)
    spec *= I * k.cast<Complex>();
  else if (order == 2)
    spec *= -(k * k).cast<Complex>();
  else
    throw InputError("spectral derivative order must be 1 or 2");
  CArray out;
  fft.inverse(spec, out);
  return out;
}

}  // namespace nlsgi
