#include "twinhet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "twinhet/errors.hpp"
#include "welch_detail.hpp"

namespace twinhet {

std::string window_name(Window w) {
  switch (w) {
    case Window::hann:
      return "hann";
    case Window::rectangular:
      return "rectangular";
  }
  return "unknown";
}

Window window_from_name(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rectangular" || name == "boxcar") return Window::rectangular;
  throw ConfigError(fmt::format("unknown window '{}' (expected hann or rectangular)", name));
}

std::vector<double> window_coefficients(Window w, std::size_t length) {
  std::vector<double> coeffs(length, 1.0);
  if (w == Window::hann) {
    for (std::size_t n = 0; n < length; ++n) {
      coeffs[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                       static_cast<double>(length));
    }
  }
  return coeffs;
}

namespace detail {

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

RealFftPlan::RealFftPlan(std::size_t length) : length_(length) {
  auto in = alloc_real(length);
  auto out = alloc_complex(length / 2 + 1);
  std::lock_guard lock(fftw_planner_mutex());
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(length), in.get(), out.get(), FFTW_ESTIMATE);
  if (plan_ == nullptr) throw NumericError("FFTW failed to create a plan");
}

RealFftPlan::~RealFftPlan() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan_);
}

void RealFftPlan::execute(double* in, fftw_complex* out) const {
  fftw_execute_dft_r2c(plan_, in, out);
}

WelchLayout plan_welch(std::size_t n_samples, const WelchOptions& options) {
  if (options.segment_len < 8) {
    throw NumericError(fmt::format("segment length {} too short", options.segment_len));
  }
  if (!(options.overlap >= 0.0 && options.overlap < 1.0)) {
    throw NumericError(fmt::format("overlap fraction {} outside [0, 1)", options.overlap));
  }
  if (n_samples < options.segment_len) {
    throw NumericError(fmt::format("series of {} samples is shorter than one segment ({})",
                                   n_samples, options.segment_len));
  }
  WelchLayout layout;
  layout.segment_len = options.segment_len;
  const auto overlap_samples = static_cast<std::size_t>(
      std::llround(options.overlap * static_cast<double>(options.segment_len)));
  layout.step = std::max<std::size_t>(1, options.segment_len - overlap_samples);
  layout.segments = 1 + (n_samples - options.segment_len) / layout.step;
  layout.bins = options.segment_len / 2 + 1;
  layout.window = window_coefficients(options.window, options.segment_len);
  for (double w : layout.window) {
    layout.window_power += w * w;
    layout.window_sum += w;
  }
  return layout;
}

void segment_power(std::span<const double> samples, const WelchLayout& layout,
                   const RealFftPlan& plan, std::size_t seg, double* in, fftw_complex* out,
                   double* power) {
  const double* src = samples.data() + seg * layout.step;
  for (std::size_t n = 0; n < layout.segment_len; ++n) in[n] = layout.window[n] * src[n];
  plan.execute(in, out);
  for (std::size_t k = 0; k < layout.bins; ++k) {
    power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
}

PowerSpectrum finish_welch(std::vector<double> accumulated, const WelchLayout& layout,
                           double sample_rate, const WelchOptions& options) {
  PowerSpectrum spec;
  spec.bin_width = sample_rate / static_cast<double>(layout.segment_len);
  spec.rbw = sample_rate * layout.window_power / (layout.window_sum * layout.window_sum);
  spec.averages = layout.segments;
  spec.window = window_name(options.window);
  spec.freqs.resize(layout.bins);
  const double base =
      1.0 / (sample_rate * layout.window_power * static_cast<double>(layout.segments));
  const bool even = layout.segment_len % 2 == 0;
  for (std::size_t k = 0; k < layout.bins; ++k) {
    spec.freqs[k] = static_cast<double>(k) * spec.bin_width;
    const bool unpaired = k == 0 || (even && k == layout.bins - 1);
    accumulated[k] *= unpaired ? base : 2.0 * base;
  }
  spec.psd = std::move(accumulated);
  return spec;
}

}  // namespace detail

PowerSpectrum welch_psd(std::span<const double> samples, double sample_rate,
                        const WelchOptions& options) {
  if (!(sample_rate > 0.0)) throw NumericError("sample rate must be > 0");
  const detail::WelchLayout layout = detail::plan_welch(samples.size(), options);
  const detail::RealFftPlan plan(layout.segment_len);

  constexpr std::size_t kBatch = 256;
  std::vector<double> accumulated(layout.bins, 0.0);
  std::vector<double> partial(kBatch * layout.bins);
  for (std::size_t first = 0; first < layout.segments; first += kBatch) {
    const std::size_t count = std::min(kBatch, layout.segments - first);
#pragma omp parallel
    {
      auto in = detail::alloc_real(layout.segment_len);
      auto out = detail::alloc_complex(layout.bins);
#pragma omp for schedule(static)
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(count); ++j) {
        detail::segment_power(samples, layout, plan, first + static_cast<std::size_t>(j),
                              in.get(), out.get(), partial.data() + j * layout.bins);
      }
    }
    for (std::size_t j = 0; j < count; ++j) {
      const double* p = partial.data() + j * layout.bins;
      for (std::size_t k = 0; k < layout.bins; ++k) accumulated[k] += p[k];
    }
  }
  return detail::finish_welch(std::move(accumulated), layout, sample_rate, options);
}

PowerSpectrum white_noise_reference(const PowerSpectrum& like, double variance) {
  if (like.freqs.empty() || like.bin_width <= 0.0) {
    throw NumericError("white_noise_reference: template spectrum is empty");
  }
  PowerSpectrum ref = like;
  ref.clamped_bins = 0;
  const std::size_t bins = like.freqs.size();
  const double sample_rate = like.bin_width * static_cast<double>(2 * (bins - 1));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || k == bins - 1;
    ref.psd[k] = (edge ? 1.0 : 2.0) * variance / sample_rate;
  }
  return ref;
}

namespace {

bool notched(double f, std::span<const Notch> notches) {
  return std::any_of(notches.begin(), notches.end(), [f](const Notch& n) {
    return std::abs(f - n.center_hz) <= n.half_width_hz;
  });
}

void require_same_axis(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw NumericError(
        fmt::format("frequency axes differ in length ({} vs {} bins)", a.size(), b.size()));
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > 1e-9 * std::max(1.0, std::abs(a[k]))) {
      throw NumericError(fmt::format("frequency axes differ at bin {} ({} vs {} Hz)", k, a[k], b[k]));
    }
  }
}

template <typename Value>
double mean_over_band(const std::vector<double>& freqs, Value value, const Band& band,
                      std::span<const Notch> notches) {
  if (!(band.hi_hz > band.lo_hz)) {
    throw NumericError(fmt::format("empty band [{}, {}] Hz", band.lo_hz, band.hi_hz));
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double f = freqs[k];
    if (f < band.lo_hz || f > band.hi_hz || notched(f, notches)) continue;
    sum += value(k);
    ++count;
  }
  if (count == 0) {
    throw NumericError(
        fmt::format("no spectral bins inside band [{}, {}] Hz", band.lo_hz, band.hi_hz));
  }
  return sum / static_cast<double>(count);
}

double db_or_floor(double linear) {
  if (linear <= 0.0) return kZeroPowerDb;
  return std::max(kZeroPowerDb, 10.0 * std::log10(linear));
}

}  // namespace

double band_mean(const PowerSpectrum& spec, const Band& band, std::span<const Notch> notches) {
  return mean_over_band(spec.freqs, [&](std::size_t k) { return spec.psd[k]; }, band, notches);
}

SpectrumRecord normalize_to_shot(const PowerSpectrum& spec, const PowerSpectrum& shot_reference,
                                 const Band& band) {
  require_same_axis(spec.freqs, shot_reference.freqs);
  const double shot = band_mean(shot_reference, band);
  if (!(shot > 0.0)) throw NumericError("shot-noise reference has no power in band");
  SpectrumRecord rec;
  rec.freqs = spec.freqs;
  rec.rbw = spec.rbw;
  rec.averages = spec.averages;
  rec.window = spec.window;
  rec.clamped_bins = spec.clamped_bins;
  rec.psd_db.resize(spec.psd.size());
  for (std::size_t k = 0; k < spec.psd.size(); ++k) rec.psd_db[k] = db_or_floor(spec.psd[k] / shot);
  return rec;
}

SpectrumRecord normalize_to_shot(const SpectrumRecord& spec, const SpectrumRecord& shot_reference,
                                 const Band& band) {
  require_same_axis(spec.freqs, shot_reference.freqs);
  const double offset_db = band_average(shot_reference, band);
  SpectrumRecord rec = spec;
  for (double& v : rec.psd_db) v = std::max(kZeroPowerDb, v - offset_db);
  return rec;
}

double band_average(const SpectrumRecord& spec, const Band& band, std::span<const Notch> notches) {
  const double mean = mean_over_band(
      spec.freqs, [&](std::size_t k) { return std::pow(10.0, spec.psd_db[k] / 10.0); }, band,
      notches);
  return db_or_floor(mean);
}

PowerSpectrum subtract_dark_noise(const PowerSpectrum& spec, const PowerSpectrum& dark,
                                  const Band& check_band, double epsilon) {
  require_same_axis(spec.freqs, dark.freqs);
  if (!(epsilon > 0.0)) throw NumericError("dark-noise clamp epsilon must be > 0");
  PowerSpectrum out = spec;
  out.clamped_bins = 0;
  for (std::size_t k = 0; k < spec.psd.size(); ++k) {
    const double f = spec.freqs[k];
    const bool in_band = f >= check_band.lo_hz && f <= check_band.hi_hz;
    if (in_band && dark.psd[k] >= spec.psd[k]) {
      throw NumericError(fmt::format(
          "dark noise ({:.6g}) is not below the measurement ({:.6g}) at {} Hz", dark.psd[k],
          spec.psd[k], f));
    }
    const double floor = epsilon * spec.psd[k];
    const double diff = spec.psd[k] - dark.psd[k];
    if (diff < floor) {
      out.psd[k] = floor;
      ++out.clamped_bins;
    } else {
      out.psd[k] = diff;
    }
  }
  return out;
}

namespace {

struct ToneBins {
  std::size_t tone = 0;
  std::vector<double> floor;
};

ToneBins locate_tone(const std::vector<double>& freqs, double rbw, double tone_freq,
                     const ToneSnrOptions& options, const std::vector<double>& linear) {
  if (freqs.size() < 2) throw NumericError("spectrum too short for tone analysis");
  const double df = freqs[1] - freqs[0];
  const double pos = (tone_freq - freqs.front()) / df;
  if (pos < 0.0 || pos > static_cast<double>(freqs.size() - 1)) {
    throw NumericError(fmt::format("tone at {} Hz is outside the frequency axis", tone_freq));
  }
  const auto k = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(freqs[k] - tone_freq) > 0.5 * std::max(rbw, df)) {
    throw NumericError(fmt::format("tone at {} Hz is not within half an RBW of a bin", tone_freq));
  }
  const std::size_t half = options.floor_half_width_bins;
  if (half <= options.guard_bins) throw NumericError("floor window must exceed the guard bins");
  if (k < half || k + half >= freqs.size()) {
    throw NumericError(
        fmt::format("tone at {} Hz is too close to the axis edge for a floor estimate", tone_freq));
  }
  ToneBins bins;
  bins.tone = k;
  for (std::size_t j = k - half; j <= k + half; ++j) {
    const std::size_t dist = j > k ? j - k : k - j;
    if (dist > options.guard_bins) bins.floor.push_back(linear[j]);
  }
  return bins;
}

double median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower =
        *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

}  // namespace

double tone_snr(const SpectrumRecord& spec, double tone_freq, const ToneSnrOptions& options) {
  std::vector<double> linear(spec.psd_db.size());
  for (std::size_t k = 0; k < linear.size(); ++k) linear[k] = std::pow(10.0, spec.psd_db[k] / 10.0);
  const ToneBins bins = locate_tone(spec.freqs, spec.rbw, tone_freq, options, linear);
  const double floor = median(bins.floor);
  return db_or_floor(linear[bins.tone] / floor);
}

ToneMeasurement measure_tone(const PowerSpectrum& spec, double tone_freq,
                             const ToneSnrOptions& options) {
  const ToneBins bins = locate_tone(spec.freqs, spec.rbw, tone_freq, options, spec.psd);
  ToneMeasurement m;
  m.floor_psd = median(bins.floor);
  m.power = std::max(0.0, (spec.psd[bins.tone] - m.floor_psd) * spec.rbw);
  m.detection_limit = m.floor_psd * spec.rbw / std::sqrt(static_cast<double>(spec.averages));
  return m;
}

}  // namespace twinhet
