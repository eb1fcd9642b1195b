#pragma once

// Quadrature bookkeeping for dual-carrier balanced heterodyne readout.
//
// Two interferometers are probed by carriers at w0 - delta ("lower") and
// w0 + delta ("upper"). Demodulating the balanced-detector photocurrent at
// delta yields an in-phase current that carries the amplitude quadratures of
// both carriers and an in-quadrature current that carries their phase
// quadratures. All amplitudes are vacuum-normalized: a vacuum quadrature has
// unit variance.

#include <numbers>

namespace twinhet {

struct ModeQuadratures {
  double x1_lower = 0.0;
  double x2_lower = 0.0;
  double x1_upper = 0.0;
  double x2_upper = 0.0;

  bool finite() const;
};

/// Quadratures of the injected two-mode squeezed field, one mode per carrier.
struct SqueezeModeQuadratures {
  double s1_lower = 0.0;
  double s2_lower = 0.0;
  double s1_upper = 0.0;
  double s2_upper = 0.0;

  bool finite() const;
};

/// Reduces an angle to [0, 2pi).
double wrap_phase(double radians);

/// Readout phases. theta_lo is the LO phase, phi the relative phase of the two
/// interferometer carriers and theta_sq the squeezed-quadrature angle. Stored
/// reduced to [0, 2pi).
class PhaseSettings {
 public:
  PhaseSettings() = default;
  PhaseSettings(double theta_lo, double phi, double theta_sq = 0.0);

  double theta_lo() const { return theta_lo_; }
  double phi() const { return phi_; }
  double theta_sq() const { return theta_sq_; }

 private:
  double theta_lo_ = 0.0;
  double phi_ = 0.0;
  double theta_sq_ = 0.0;
};

struct DemodulatedPair {
  double i_inphase = 0.0;
  double i_quadrature = 0.0;
};

/// Frequency plan. omega0 is informational only; delta and signal_freq in Hz.
struct CarrierLayout {
  double omega0 = 1.7704e15;  // 1064 nm, rad/s
  double delta = 425e6;
  double signal_freq = 25e3;

  /// Throws NumericError unless delta > 0, signal_freq > 0 and
  /// signal_freq <= delta / 100.
  void validate() const;
};

/// Rotates the quadrature pair (a1, a2) by `angle`:
///   a1' = cos(angle) a1 - sin(angle) a2,  a2' = sin(angle) a1 + cos(angle) a2.
struct QuadraturePair {
  double first;
  double second;
};
QuadraturePair rotate_pair(double a1, double a2, double angle);

/// Maps the interferometer quadratures into the readout basis: the lower
/// carrier turns by theta_lo, the upper by phi - theta_lo. Norm-preserving per
/// carrier.
ModeQuadratures rotate_readout(const ModeQuadratures& q, const PhaseSettings& phases);

/// Readout rotation seen by the squeezed field: theta_lo on the lower mode and
/// -theta_lo on the upper mode. The carrier phase phi does not act on the
/// squeezed field, so the sum current stays squeezed at phi = 0 and phi = pi.
SqueezeModeQuadratures rotate_squeeze_readout(const SqueezeModeQuadratures& s,
                                              const PhaseSettings& phases);

/// Demodulated in-phase and in-quadrature currents. Takes the quadratures in
/// the interferometer basis and applies rotate_readout / rotate_squeeze_readout
/// internally, then
///   i_I = (X1' lower + X1' upper + S1' lower + S1' upper) / 2
///   i_Q = (X2' lower - X2' upper + S2' lower - S2' upper) / 2
/// The proportionality constant is 1, so a vacuum input gives variance 1/2
/// per current; see to_shot_units.
DemodulatedPair demodulate(const ModeQuadratures& q, const SqueezeModeQuadratures& s,
                           const PhaseSettings& phases);

/// Factor that brings demodulate() output to shot-noise units (vacuum input ->
/// unit variance per current).
inline constexpr double kShotUnitScale = std::numbers::sqrt2;

inline DemodulatedPair to_shot_units(const DemodulatedPair& d) {
  return {kShotUnitScale * d.i_inphase, kShotUnitScale * d.i_quadrature};
}

/// Tone-power gain of an amplitude-quadrature signal read out from
/// `n_interferometers` (1 or 2) equal-power interferometers, relative to a
/// single interferometer read at theta_lo = 0. Returns -infinity for perfect
/// cancellation. Throws NumericError for n outside {1, 2}.
double signal_gain_db(int n_interferometers, const PhaseSettings& phases);

}  // namespace twinhet
