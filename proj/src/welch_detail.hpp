#pragma once

// FFTW plumbing shared by the parallel and serial Welch estimators.

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "twinhet/spectral.hpp"

namespace twinhet::detail {

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuffer alloc_real(std::size_t n);
ComplexBuffer alloc_complex(std::size_t n);

/// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& fftw_planner_mutex();

/// Real-to-complex plan of fixed length, executed on caller-owned buffers
/// allocated with alloc_real/alloc_complex.
class RealFftPlan {
 public:
  explicit RealFftPlan(std::size_t length);
  ~RealFftPlan();
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;

  void execute(double* in, fftw_complex* out) const;
  std::size_t length() const { return length_; }

 private:
  std::size_t length_;
  fftw_plan plan_ = nullptr;
};

struct WelchLayout {
  std::size_t segment_len = 0;
  std::size_t step = 0;
  std::size_t segments = 0;
  std::size_t bins = 0;
  std::vector<double> window;
  double window_power = 0.0;  // sum w^2
  double window_sum = 0.0;    // sum w
};

/// Validates options against the series length and computes the layout.
WelchLayout plan_welch(std::size_t n_samples, const WelchOptions& options);

/// |FFT(window * segment)|^2 for segment `seg`, written to `power`.
void segment_power(std::span<const double> samples, const WelchLayout& layout,
                   const RealFftPlan& plan, std::size_t seg, double* in, fftw_complex* out,
                   double* power);

/// Converts accumulated |X|^2 sums to a one-sided PSD.
PowerSpectrum finish_welch(std::vector<double> accumulated, const WelchLayout& layout,
                           double sample_rate, const WelchOptions& options);

}  // namespace twinhet::detail
