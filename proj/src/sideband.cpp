#include "twinhet/sideband.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "twinhet/errors.hpp"

namespace twinhet {

bool ModeQuadratures::finite() const {
  return std::isfinite(x1_lower) && std::isfinite(x2_lower) && std::isfinite(x1_upper) &&
         std::isfinite(x2_upper);
}

bool SqueezeModeQuadratures::finite() const {
  return std::isfinite(s1_lower) && std::isfinite(s2_lower) && std::isfinite(s1_upper) &&
         std::isfinite(s2_upper);
}

double wrap_phase(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(radians, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod of a tiny negative value can round back up to 2pi
  if (r >= two_pi) r = 0.0;
  return r;
}

PhaseSettings::PhaseSettings(double theta_lo, double phi, double theta_sq)
    : theta_lo_(wrap_phase(theta_lo)), phi_(wrap_phase(phi)), theta_sq_(wrap_phase(theta_sq)) {}

void CarrierLayout::validate() const {
  if (!(delta > 0.0)) throw NumericError("carrier delta must be > 0");
  if (!(signal_freq > 0.0)) throw NumericError("signal frequency must be > 0");
  if (signal_freq > delta / 100.0) {
    throw NumericError("signal frequency " + std::to_string(signal_freq) +
                       " Hz is not small compared to the heterodyne offset");
  }
}

QuadraturePair rotate_pair(double a1, double a2, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a1 - s * a2, s * a1 + c * a2};
}

ModeQuadratures rotate_readout(const ModeQuadratures& q, const PhaseSettings& phases) {
  const auto lower = rotate_pair(q.x1_lower, q.x2_lower, phases.theta_lo());
  const auto upper = rotate_pair(q.x1_upper, q.x2_upper, phases.phi() - phases.theta_lo());
  return {lower.first, lower.second, upper.first, upper.second};
}

SqueezeModeQuadratures rotate_squeeze_readout(const SqueezeModeQuadratures& s,
                                              const PhaseSettings& phases) {
  const auto lower = rotate_pair(s.s1_lower, s.s2_lower, phases.theta_lo());
  const auto upper = rotate_pair(s.s1_upper, s.s2_upper, -phases.theta_lo());
  return {lower.first, lower.second, upper.first, upper.second};
}

DemodulatedPair demodulate(const ModeQuadratures& q, const SqueezeModeQuadratures& s,
                           const PhaseSettings& phases) {
  const ModeQuadratures x = rotate_readout(q, phases);
  const SqueezeModeQuadratures sq = rotate_squeeze_readout(s, phases);
  DemodulatedPair out;
  out.i_inphase = 0.5 * ((x.x1_lower + x.x1_upper) + (sq.s1_lower + sq.s1_upper));
  out.i_quadrature = 0.5 * ((x.x2_lower - x.x2_upper) + (sq.s2_lower - sq.s2_upper));
  return out;
}

double signal_gain_db(int n_interferometers, const PhaseSettings& phases) {
  // Unit amplitude-quadrature tone in each participating interferometer; the
  // reference is one interferometer read at theta_lo = 0, i.e. i_I = 1/2.
  ModeQuadratures tone;
  switch (n_interferometers) {
    case 1:
      tone.x1_lower = 1.0;
      break;
    case 2:
      tone.x1_lower = 1.0;
      tone.x1_upper = 1.0;
      break;
    default:
      throw NumericError("signal_gain_db: number of interferometers must be 1 or 2, got " +
                         std::to_string(n_interferometers));
  }
  const double amplitude = std::abs(demodulate(tone, {}, phases).i_inphase) / 0.5;
  if (amplitude < 1e-15) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(amplitude);
}

}  // namespace twinhet
