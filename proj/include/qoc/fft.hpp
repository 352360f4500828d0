#pragma once

#include <complex>

namespace qoc {

// Thin RAII wrapper around FFTW c2c transforms of a fixed size. Plans are
// created once per instance (planner access serialized internally); execution
// on distinct arrays is safe from multiple threads, but a single instance's
// buffers are not shared, so give each worker its own propagator.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int n() const { return n_; }

  // In-place unnormalized DFT.
  void forward(std::complex<double>* data) const;
  // In-place unnormalized inverse DFT (caller owns the 1/n).
  void inverse(std::complex<double>* data) const;

 private:
  int n_;
  void* plan_fwd_;
  void* plan_inv_;
};

}  // namespace qoc
