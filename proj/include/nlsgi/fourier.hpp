#pragma once

#include <memory>

#include "nlsgi/types.hpp"

namespace nlsgi {

// Length-fixed complex DFT with its own scratch buffers. Forward is
// X_k = sum_j x_j e^{-2 pi i jk/n}; inverse includes the 1/n.
// One instance per thread: the transform is stateful (plans, scratch).
class Fft {
 public:
  explicit Fft(Index n);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  Index size() const { return n_; }
  void forward(const CArray& in, CArray& out);
  void inverse(const CArray& in, CArray& out);

 private:
  struct Impl;
  Index n_;
  std::unique_ptr<Impl> impl_;
};

// Angular wavenumbers 2 pi m / (n dx) in FFT order.
RArray fft_wavenumbers(Index n, double dx);

// Spectral derivative of a periodic sample vector, order 1 or 2.
CArray spectral_derivative(const CArray& f, double dx, int order = 1);
CArray spectral_derivative(const CArray& f, double dx, int order, Fft& fft);

}  // namespace nlsgi
