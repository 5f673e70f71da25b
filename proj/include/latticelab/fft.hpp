#ifndef LATTICELAB_FFT_HPP
#define LATTICELAB_FFT_HPP

#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace latticelab {

/// In-place d-dimensional DFT on an n^d row-major cube, unnormalized.
/// sign = -1 computes sum_k a_k e^{-2 pi i m.k/n}; sign = +1 the inverse kernel.
inline void fft_cube(std::vector<std::complex<double>>& data, int d, int n, int sign)
{
  std::size_t expected = 1;
  for (int i = 0; i < d; ++i)
    expected *= static_cast<std::size_t>(n);
  if (data.size() != expected)
    throw std::invalid_argument{"latticelab::fft_cube: data size is not n^d"};
  std::vector<int> dims(d, n);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  // Planning is not thread safe in FFTW; execution is.
  static std::mutex plan_mutex;
  fftw_plan plan;
  {
    std::lock_guard lock{plan_mutex};
    plan = fftw_plan_dft(d, dims.data(), buf, buf, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!plan)
    throw std::runtime_error{"latticelab::fft_cube: FFTW could not create a plan"};
  fftw_execute(plan);
  std::lock_guard lock{plan_mutex};
  fftw_destroy_plan(plan);
}

} // namespace latticelab

#endif
