#include "twinhet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "synth_detail.hpp"
#include "twinhet/errors.hpp"

namespace twinhet {

namespace {

constexpr std::size_t kSegmentSamples = std::size_t{1} << 14;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

std::size_t SimConfig::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

std::size_t SimConfig::jitter_block_len() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(
                                      std::llround(jitter_block_seconds * sample_rate)));
}

void SimConfig::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw NumericError(fmt::format("sample_rate {} must be > 0", sample_rate));
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw NumericError(fmt::format("duration {} must be > 0", duration));
  }
  if (duration * sample_rate < 4096.0) {
    throw NumericError(fmt::format(
        "duration * sample_rate = {} samples; at least 4096 are required", duration * sample_rate));
  }
  op_point.validate();
  if (!(eta1 >= 0.0 && eta1 <= 1.0) || !(eta2 >= 0.0 && eta2 <= 1.0)) {
    throw NumericError(fmt::format("path efficiencies must lie in [0, 1], got {} and {}", eta1, eta2));
  }
  if (!(theta_rms >= 0.0) || !std::isfinite(theta_rms)) {
    throw NumericError(fmt::format("theta_rms {} must be >= 0", theta_rms));
  }
  if (!(jitter_block_seconds > 0.0)) {
    throw NumericError("jitter block length must be > 0");
  }
  if (!(dark_noise_variance >= 0.0) || !(acoustic_level >= 0.0)) {
    throw NumericError("dark-noise variance and acoustic level must be >= 0");
  }
  if (acoustic_level > 0.0 && !(acoustic_corner_hz > 10.0)) {
    throw NumericError("acoustic corner must exceed 10 Hz");
  }
  carrier.validate();
  for (const Tone& t : tones) {
    if (!(t.amplitude >= 0.0) || !std::isfinite(t.amplitude)) {
      throw NumericError(fmt::format("tone amplitude {} must be >= 0", t.amplitude));
    }
    if (!(t.frequency > 0.0) || !(sample_rate > 2.0 * t.frequency)) {
      throw NumericError(fmt::format("tone at {} Hz must be positive and below Nyquist ({} Hz)",
                                     t.frequency, sample_rate / 2.0));
    }
  }
}

void sample_two_mode_state(std::span<SqueezeModeQuadratures> out, const VariancePair& v,
                           double theta_sq, const RngStream& rng, std::uint64_t first_index) {
  const double sd_minus = std::sqrt(v.v_minus);
  const double sd_plus = std::sqrt(v.v_plus);
  const double c = std::cos(theta_sq);
  const double s = std::sin(theta_sq);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const std::uint64_t index = first_index + static_cast<std::uint64_t>(k);
    const NormalPair uv = rng.normal_pair(index, 0);
    const NormalPair wz = rng.normal_pair(index, 1);
    const double u = sd_minus * uv.first;
    const double vv = sd_plus * uv.second;
    const double w = sd_minus * wz.first;
    const double z = sd_plus * wz.second;
    const double s1l = (u + vv) * inv_sqrt2;
    const double s1u = (u - vv) * inv_sqrt2;
    const double s2l = (w + z) * inv_sqrt2;
    const double s2u = (z - w) * inv_sqrt2;
    out[k] = {c * s1l - s * s2l, s * s1l + c * s2l, c * s1u - s * s2u, s * s1u + c * s2u};
  }
}

std::vector<SqueezeModeQuadratures> sample_two_mode_state(std::size_t n,
                                                          const PumpOperatingPoint& op_point,
                                                          double theta_sq, const RngStream& rng,
                                                          std::uint64_t first_index) {
  if (n == 0) throw NumericError("sample_two_mode_state: n must be >= 1");
  op_point.validate();
  std::vector<SqueezeModeQuadratures> out(n);
  sample_two_mode_state(out, pure_variances(op_point), theta_sq, rng, first_index);
  return out;
}

void apply_loss(std::span<SqueezeModeQuadratures> samples, double eta_lower, double eta_upper,
                const RngStream& rng, std::uint64_t first_index) {
  if (!(eta_lower >= 0.0 && eta_lower <= 1.0) || !(eta_upper >= 0.0 && eta_upper <= 1.0)) {
    throw NumericError(
        fmt::format("loss efficiencies must lie in [0, 1], got {} and {}", eta_lower, eta_upper));
  }
  if (eta_lower == 1.0 && eta_upper == 1.0) return;
  const double keep_l = std::sqrt(eta_lower);
  const double mix_l = std::sqrt(1.0 - eta_lower);
  const double keep_u = std::sqrt(eta_upper);
  const double mix_u = std::sqrt(1.0 - eta_upper);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const std::uint64_t index = first_index + static_cast<std::uint64_t>(k);
    const NormalPair vac_l = rng.normal_pair(index, 0);
    const NormalPair vac_u = rng.normal_pair(index, 1);
    SqueezeModeQuadratures& q = samples[k];
    q.s1_lower = keep_l * q.s1_lower + mix_l * vac_l.first;
    q.s2_lower = keep_l * q.s2_lower + mix_l * vac_l.second;
    q.s1_upper = keep_u * q.s1_upper + mix_u * vac_u.first;
    q.s2_upper = keep_u * q.s2_upper + mix_u * vac_u.second;
  }
}

void apply_loss(std::span<SqueezeModeQuadratures> samples, double eta, const RngStream& rng,
                std::uint64_t first_index) {
  apply_loss(samples, eta, eta, rng, first_index);
}

void apply_phase_jitter(std::span<SqueezeModeQuadratures> samples, double theta_rms,
                        std::size_t block_len, const RngStream& rng,
                        std::uint64_t first_index) {
  if (!(theta_rms >= 0.0)) throw NumericError("theta_rms must be >= 0");
  if (block_len == 0) throw NumericError("jitter block length must be >= 1");
  if (theta_rms == 0.0) return;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const std::uint64_t index = first_index + static_cast<std::uint64_t>(k);
    const double angle = theta_rms * rng.normal_pair(index / block_len, 0).first;
    SqueezeModeQuadratures& q = samples[k];
    const auto lower = rotate_pair(q.s1_lower, q.s2_lower, angle);
    const auto upper = rotate_pair(q.s1_upper, q.s2_upper, angle);
    q = {lower.first, lower.second, upper.first, upper.second};
  }
}

namespace detail {

std::vector<AcousticLine> acoustic_lines(const SimConfig& config) {
  std::vector<AcousticLine> lines;
  if (config.acoustic_level <= 0.0) return lines;
  constexpr int kLines = 32;
  constexpr double kLowest = 10.0;
  const double f_hi = std::min(config.acoustic_corner_hz, 0.45 * config.sample_rate);
  const RngStream rng(config.seed, streams::kAcoustic);
  const double ratio = std::pow(f_hi / kLowest, 1.0 / (kLines - 1));
  double f = kLowest;
  for (int k = 0; k < kLines; ++k, f *= ratio) {
    lines.push_back({f, config.acoustic_level * kLowest / f,
                     kTwoPi * rng.uniform_pair(static_cast<std::uint64_t>(k))[0]});
  }
  return lines;
}

ModeQuadratures tone_quadratures(const std::vector<Tone>& tones, double t) {
  ModeQuadratures q;
  for (const Tone& tone : tones) {
    const double value = tone.amplitude * std::cos(kTwoPi * tone.frequency * t + tone.phase);
    const bool lower = tone.target == ToneTarget::lower;
    if (tone.quadrature == ToneQuadrature::amplitude) {
      (lower ? q.x1_lower : q.x1_upper) += value;
    } else {
      (lower ? q.x2_lower : q.x2_upper) += value;
    }
  }
  return q;
}

}  // namespace detail

TimeSeriesPair synthesize(const SimConfig& config) {
  config.validate();
  const std::size_t n = config.sample_count();
  TimeSeriesPair ts;
  ts.sample_rate = config.sample_rate;
  ts.metadata = config;
  ts.i_inphase.resize(n);
  ts.i_quadrature.resize(n);

  const VariancePair v = config.squeezing ? pure_variances(config.op_point) : VariancePair{};
  const RngStream squeeze_rng(config.seed, streams::kSqueeze);
  const RngStream loss_rng(config.seed, streams::kLoss);
  const RngStream jitter_rng(config.seed, streams::kJitter);
  const RngStream dark_rng(config.seed, streams::kDark);
  const std::size_t block_len = config.jitter_block_len();
  const double dark_sd = std::sqrt(config.dark_noise_variance);
  const auto acoustic = detail::acoustic_lines(config);

  const std::ptrdiff_t segments =
      static_cast<std::ptrdiff_t>((n + kSegmentSamples - 1) / kSegmentSamples);
#pragma omp parallel
  {
    std::vector<SqueezeModeQuadratures> field(kSegmentSamples);
#pragma omp for schedule(static)
    for (std::ptrdiff_t seg = 0; seg < segments; ++seg) {
      const std::size_t start = static_cast<std::size_t>(seg) * kSegmentSamples;
      const std::size_t len = std::min(kSegmentSamples, n - start);
      std::span<SqueezeModeQuadratures> chunk(field.data(), len);
      sample_two_mode_state(chunk, v, config.phases.theta_sq(), squeeze_rng, start);
      if (config.squeezing) {
        apply_loss(chunk, config.eta1, config.eta2, loss_rng, start);
        apply_phase_jitter(chunk, config.theta_rms, block_len, jitter_rng, start);
      }
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t i = start + k;
        const double t = static_cast<double>(i) / config.sample_rate;
        const ModeQuadratures x = detail::tone_quadratures(config.tones, t);
        DemodulatedPair d = to_shot_units(demodulate(x, chunk[k], config.phases));
        if (dark_sd > 0.0) {
          const NormalPair dark = dark_rng.normal_pair(i, 0);
          d.i_inphase += dark_sd * dark.first;
          d.i_quadrature += dark_sd * dark.second;
        }
        for (const auto& line : acoustic) {
          d.i_inphase += line.amplitude * std::cos(kTwoPi * line.frequency * t + line.phase);
        }
        ts.i_inphase[i] = d.i_inphase;
        ts.i_quadrature[i] = d.i_quadrature;
      }
    }
  }
  return ts;
}

double predicted_noise_variance(const SimConfig& config) {
  if (!config.squeezing) return 1.0 + config.dark_noise_variance;
  const VariancePair pure = pure_variances(config.op_point);
  const auto d = DegradationParams::from_efficiencies(config.eta1, config.eta2, config.theta_rms);
  return variance_at_angle(degrade(pure, d), config.phases.theta_sq()) +
         config.dark_noise_variance;
}

double cancellation_residual_db(double amp_lower, double amp_upper, double phi_error) {
  if (!(amp_lower >= 0.0) || !(amp_upper >= 0.0)) {
    throw NumericError("tone amplitudes must be >= 0");
  }
  if (amp_lower == 0.0 && amp_upper == 0.0) {
    throw NumericError("cancellation_residual_db: both amplitudes are zero");
  }
  const double c = std::cos(phi_error);
  const double s = std::sin(phi_error);
  const double sum = std::hypot(amp_lower + amp_upper * c, amp_upper * s);
  const double diff = std::hypot(amp_lower - amp_upper * c, amp_upper * s);
  if (diff == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(sum / diff);
}

}  // namespace twinhet
