#pragma once

// Welch PSD estimation and the shot-noise-relative spectrum operations used to
// read out synthesized photocurrents: normalization, band averaging,
// dark-noise subtraction and tone SNR.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace twinhet {

enum class Window { hann, rectangular };

std::string window_name(Window w);
Window window_from_name(const std::string& name);
/// Periodic (DFT-even) window coefficients.
std::vector<double> window_coefficients(Window w, std::size_t length);

struct WelchOptions {
  std::size_t segment_len = 4096;
  double overlap = 0.5;
  Window window = Window::hann;
};

/// One-sided PSD in linear units per Hz. For unit-variance white noise
/// sampled at fs the interior bins average 2 / fs.
struct PowerSpectrum {
  std::vector<double> freqs;
  std::vector<double> psd;
  double bin_width = 0.0;
  /// Equivalent noise bandwidth of one bin; tone power = peak PSD * rbw.
  double rbw = 0.0;
  std::size_t averages = 0;
  std::string window;
  /// Bins floor-clamped by subtract_dark_noise.
  std::size_t clamped_bins = 0;
};

/// Spectrum in dB relative to shot noise.
struct SpectrumRecord {
  std::vector<double> freqs;
  std::vector<double> psd_db;
  double rbw = 0.0;
  std::size_t averages = 0;
  std::string window;
  std::size_t clamped_bins = 0;
};

/// Zero power maps to this value so psd_db stays finite.
inline constexpr double kZeroPowerDb = -300.0;

struct Band {
  double lo_hz = 12e3;
  double hi_hz = 50e3;
};

/// Bins within half_width_hz of center_hz are dropped from band averages.
struct Notch {
  double center_hz = 0.0;
  double half_width_hz = 0.0;
};

/// Welch estimate over `segment_len` blocks with fractional overlap. Segment
/// FFTs run in parallel; accumulation is in segment order, so the result does
/// not depend on the thread count. Throws NumericError if the series is
/// shorter than one segment or options are out of range.
PowerSpectrum welch_psd(std::span<const double> samples, double sample_rate,
                        const WelchOptions& options = {});

/// Flat reference on the axis of `like`: the PSD of white noise with the
/// given variance.
PowerSpectrum white_noise_reference(const PowerSpectrum& like, double variance = 1.0);

/// Mean linear PSD over the band, excluding notched bins. Throws NumericError
/// if no bin remains.
double band_mean(const PowerSpectrum& spec, const Band& band, std::span<const Notch> notches = {});

/// psd_db = 10 log10(spec / mean(shot_reference over band)). Throws
/// NumericError when the frequency axes differ.
SpectrumRecord normalize_to_shot(const PowerSpectrum& spec, const PowerSpectrum& shot_reference,
                                 const Band& band = {});
/// Re-references an already normalized record.
SpectrumRecord normalize_to_shot(const SpectrumRecord& spec, const SpectrumRecord& shot_reference,
                                 const Band& band = {});

/// Mean of the linear PSD over the band, in dB.
double band_average(const SpectrumRecord& spec, const Band& band = {},
                    std::span<const Notch> notches = {});

/// Linear-domain subtraction spec - dark, floor-clamped at epsilon * spec.
/// Throws NumericError if dark >= spec at any bin inside `check_band`.
PowerSpectrum subtract_dark_noise(const PowerSpectrum& spec, const PowerSpectrum& dark,
                                  const Band& check_band = {}, double epsilon = 1e-12);

struct ToneSnrOptions {
  /// Floor window: bins within this many bins of the tone...
  std::size_t floor_half_width_bins = 64;
  /// ...excluding this many bins on either side of it.
  std::size_t guard_bins = 4;
};

/// Ratio of the tone bin to the median of the surrounding floor, in dB.
/// Throws NumericError if the tone is not within rbw/2 of a bin or the floor
/// window runs off the axis.
double tone_snr(const SpectrumRecord& spec, double tone_freq, const ToneSnrOptions& options = {});

/// Tone power (variance units) above the local median floor, clamped at 0,
/// plus the floor it was measured against.
struct ToneMeasurement {
  double power = 0.0;
  double floor_psd = 0.0;
  /// Smallest tone power distinguishable from the floor at this averaging.
  double detection_limit = 0.0;
};
ToneMeasurement measure_tone(const PowerSpectrum& spec, double tone_freq,
                             const ToneSnrOptions& options = {});

namespace reference {

/// Single-threaded Welch estimate with the same arithmetic as welch_psd.
PowerSpectrum welch_psd(std::span<const double> samples, double sample_rate,
                        const WelchOptions& options = {});

}  // namespace reference

}  // namespace twinhet
