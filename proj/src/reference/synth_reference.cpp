#include <cmath>
#include <numbers>

#include "../synth_detail.hpp"
#include "twinhet/synth.hpp"

namespace twinhet::reference {

TimeSeriesPair synthesize(const SimConfig& config) {
  config.validate();
  const std::size_t n = config.sample_count();
  TimeSeriesPair ts;
  ts.sample_rate = config.sample_rate;
  ts.metadata = config;
  ts.i_inphase.resize(n);
  ts.i_quadrature.resize(n);

  const VariancePair v = config.squeezing ? pure_variances(config.op_point) : VariancePair{};
  const double sd_minus = std::sqrt(v.v_minus);
  const double sd_plus = std::sqrt(v.v_plus);
  const double c = std::cos(config.phases.theta_sq());
  const double s = std::sin(config.phases.theta_sq());
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  const RngStream squeeze_rng(config.seed, streams::kSqueeze);
  const RngStream loss_rng(config.seed, streams::kLoss);
  const RngStream jitter_rng(config.seed, streams::kJitter);
  const RngStream dark_rng(config.seed, streams::kDark);
  const bool lossy = config.squeezing && !(config.eta1 == 1.0 && config.eta2 == 1.0);
  const bool jitter = config.squeezing && config.theta_rms > 0.0;
  const std::size_t block_len = config.jitter_block_len();
  const double dark_sd = std::sqrt(config.dark_noise_variance);
  const auto acoustic = detail::acoustic_lines(config);
  const double two_pi = 2.0 * std::numbers::pi;

  for (std::size_t i = 0; i < n; ++i) {
    const NormalPair uv = squeeze_rng.normal_pair(i, 0);
    const NormalPair wz = squeeze_rng.normal_pair(i, 1);
    const double u = sd_minus * uv.first;
    const double vv = sd_plus * uv.second;
    const double w = sd_minus * wz.first;
    const double z = sd_plus * wz.second;
    const double s1l = (u + vv) * inv_sqrt2;
    const double s1u = (u - vv) * inv_sqrt2;
    const double s2l = (w + z) * inv_sqrt2;
    const double s2u = (z - w) * inv_sqrt2;
    SqueezeModeQuadratures field{c * s1l - s * s2l, s * s1l + c * s2l, c * s1u - s * s2u,
                                 s * s1u + c * s2u};

    if (lossy) {
      const NormalPair vac_l = loss_rng.normal_pair(i, 0);
      const NormalPair vac_u = loss_rng.normal_pair(i, 1);
      const double keep_l = std::sqrt(config.eta1);
      const double mix_l = std::sqrt(1.0 - config.eta1);
      const double keep_u = std::sqrt(config.eta2);
      const double mix_u = std::sqrt(1.0 - config.eta2);
      field.s1_lower = keep_l * field.s1_lower + mix_l * vac_l.first;
      field.s2_lower = keep_l * field.s2_lower + mix_l * vac_l.second;
      field.s1_upper = keep_u * field.s1_upper + mix_u * vac_u.first;
      field.s2_upper = keep_u * field.s2_upper + mix_u * vac_u.second;
    }
    if (jitter) {
      const double angle = config.theta_rms * jitter_rng.normal_pair(i / block_len, 0).first;
      const double cj = std::cos(angle);
      const double sj = std::sin(angle);
      field = {cj * field.s1_lower - sj * field.s2_lower, sj * field.s1_lower + cj * field.s2_lower,
               cj * field.s1_upper - sj * field.s2_upper, sj * field.s1_upper + cj * field.s2_upper};
    }

    const double t = static_cast<double>(i) / config.sample_rate;
    const ModeQuadratures x = detail::tone_quadratures(config.tones, t);
    DemodulatedPair d = to_shot_units(demodulate(x, field, config.phases));
    if (dark_sd > 0.0) {
      const NormalPair dark = dark_rng.normal_pair(i, 0);
      d.i_inphase += dark_sd * dark.first;
      d.i_quadrature += dark_sd * dark.second;
    }
    for (const auto& line : acoustic) {
      d.i_inphase += line.amplitude * std::cos(two_pi * line.frequency * t + line.phase);
    }
    ts.i_inphase[i] = d.i_inphase;
    ts.i_quadrature[i] = d.i_quadrature;
  }
  return ts;
}

}  // namespace twinhet::reference
