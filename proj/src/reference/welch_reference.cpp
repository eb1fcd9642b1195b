#include "../welch_detail.hpp"
#include "twinhet/errors.hpp"
#include "twinhet/spectral.hpp"

namespace twinhet::reference {

PowerSpectrum welch_psd(std::span<const double> samples, double sample_rate,
                        const WelchOptions& options) {
  if (!(sample_rate > 0.0)) throw NumericError("sample rate must be > 0");
  const detail::WelchLayout layout = detail::plan_welch(samples.size(), options);
  const detail::RealFftPlan plan(layout.segment_len);
  auto in = detail::alloc_real(layout.segment_len);
  auto out = detail::alloc_complex(layout.bins);
  std::vector<double> power(layout.bins);
  std::vector<double> accumulated(layout.bins, 0.0);
  for (std::size_t seg = 0; seg < layout.segments; ++seg) {
    detail::segment_power(samples, layout, plan, seg, in.get(), out.get(), power.data());
    for (std::size_t k = 0; k < layout.bins; ++k) accumulated[k] += power[k];
  }
  return detail::finish_welch(std::move(accumulated), layout, sample_rate, options);
}

}  // namespace twinhet::reference
