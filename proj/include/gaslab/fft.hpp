#pragma once

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

namespace gaslab {

using cplx = std::complex<double>;

namespace detail {

// FFTW's planner is not re-entrant; execution on distinct plans is.
inline std::mutex &planner_mutex()
{
  static std::mutex m;
  return m;
}

/// Real 2D transform pair of one size with its own aligned buffers.
///
/// Forward output is normalized so that f(x) = sum_k c_k exp(i k.x).
/// Plans use FFTW_ESTIMATE so the chosen algorithm, and hence every bit of
/// the output, is identical from run to run.
class Transform2D {
public:
  explicit Transform2D(int n) : n_(n)
  {
    const std::size_t real_count = static_cast<std::size_t>(n) * n;
    const std::size_t spec_count = static_cast<std::size_t>(n) * (n / 2 + 1);
    real_ = static_cast<double *>(fftw_malloc(sizeof(double) * real_count));
    spec_ = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * spec_count));
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_2d(n, n, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_2d(n, n, spec_, real_, FFTW_ESTIMATE);
  }

  Transform2D(const Transform2D &) = delete;
  Transform2D &operator=(const Transform2D &) = delete;

  ~Transform2D()
  {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(real_);
    fftw_free(spec_);
  }

  void forward(std::span<const double> samples, std::span<cplx> coeffs)
  {
    std::memcpy(real_, samples.data(), sizeof(double) * samples.size());
    fftw_execute(forward_);
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      coeffs[k] = cplx(spec_[k][0] * scale, spec_[k][1] * scale);
    }
  }

  void backward(std::span<const cplx> coeffs, std::span<double> samples)
  {
    // c2r overwrites its input, so always stage through the owned buffer.
    std::memcpy(spec_, coeffs.data(), sizeof(fftw_complex) * coeffs.size());
    fftw_execute(backward_);
    std::memcpy(samples.data(), real_, sizeof(double) * samples.size());
  }

private:
  int n_;
  double *real_ = nullptr;
  fftw_complex *spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Per-thread transform for size n, created on first use.
inline Transform2D &transform_for(int n)
{
  thread_local std::map<int, std::unique_ptr<Transform2D>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<Transform2D>(n)).first;
  }
  return *it->second;
}

} // namespace detail
} // namespace gaslab
