#pragma once

// Monte Carlo synthesis of demodulated photocurrents. Noise is generated
// directly in the demodulated (audio) band: white, vacuum-normalized, with the
// two-mode squeezed field replacing vacuum when squeezing is enabled. Every
// random variate comes from a counter-based stream addressed by the global
// sample index, so output is bit-identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "twinhet/rng.hpp"
#include "twinhet/sideband.hpp"
#include "twinhet/squeezing.hpp"

namespace twinhet {

enum class ToneTarget { lower, upper };
enum class ToneQuadrature { amplitude, phase };

/// Signal tone a cos(2 pi f t + phase) added to one quadrature of one
/// interferometer's carrier, in quadrature-amplitude units at the detector.
struct Tone {
  ToneTarget target = ToneTarget::lower;
  double frequency = 25e3;
  double amplitude = 0.0;
  ToneQuadrature quadrature = ToneQuadrature::amplitude;
  double phase = 0.0;
};

struct SimConfig {
  double sample_rate = 200e3;
  double duration = 2.0;
  std::uint64_t seed = 1;
  /// Inject the two-mode squeezed field. When false the dark port sees vacuum.
  bool squeezing = true;
  PumpOperatingPoint op_point;
  PhaseSettings phases;
  /// Squeezed-field path efficiencies of the lower and upper modes.
  double eta1 = 1.0;
  double eta2 = 1.0;
  double theta_rms = 0.0;
  /// Length of the constant-phase blocks used for jitter, seconds.
  double jitter_block_seconds = 1e-3;
  std::vector<Tone> tones;
  CarrierLayout carrier;
  /// Flat detector dark-noise variance added to each current (shot units).
  double dark_noise_variance = 0.0;
  /// Optional 1/f^2 low-frequency excess on the in-phase current; 0 disables.
  double acoustic_level = 0.0;
  double acoustic_corner_hz = 10e3;

  std::size_t sample_count() const;
  std::size_t jitter_block_len() const;
  /// Throws NumericError on invariant violations.
  void validate() const;
};

/// Demodulated currents in shot-noise units (vacuum -> unit variance).
struct TimeSeriesPair {
  std::vector<double> i_inphase;
  std::vector<double> i_quadrature;
  double sample_rate = 0.0;
  SimConfig metadata;

  std::size_t size() const { return i_inphase.size(); }
};

/// Fills `out` with two-mode squeezed samples: u, w ~ N(0, V-), v, z ~ N(0, V+),
/// S1 lower/upper = (u +/- v)/sqrt2, S2 lower = (w + z)/sqrt2,
/// S2 upper = (z - w)/sqrt2, then each mode's (S1, S2) rotated by theta_sq.
/// Sample k uses stream index first_index + k.
void sample_two_mode_state(std::span<SqueezeModeQuadratures> out, const VariancePair& v,
                           double theta_sq, const RngStream& rng, std::uint64_t first_index = 0);
std::vector<SqueezeModeQuadratures> sample_two_mode_state(std::size_t n,
                                                          const PumpOperatingPoint& op_point,
                                                          double theta_sq, const RngStream& rng,
                                                          std::uint64_t first_index = 0);

/// Beam-splitter loss: q -> sqrt(eta) q + sqrt(1 - eta) vac with fresh vacuum
/// per sample and quadrature. Separate efficiencies for the two modes.
void apply_loss(std::span<SqueezeModeQuadratures> samples, double eta_lower, double eta_upper,
                const RngStream& rng, std::uint64_t first_index = 0);
void apply_loss(std::span<SqueezeModeQuadratures> samples, double eta, const RngStream& rng,
                std::uint64_t first_index = 0);

/// Rotates both modes by a common angle d ~ N(0, theta_rms^2) drawn once per
/// block of `block_len` samples (blocks aligned to global index 0).
void apply_phase_jitter(std::span<SqueezeModeQuadratures> samples, double theta_rms,
                        std::size_t block_len, const RngStream& rng,
                        std::uint64_t first_index = 0);

/// Full time-domain synthesis, segment-parallel over OpenMP threads.
TimeSeriesPair synthesize(const SimConfig& config);

/// Predicted variance of each current from the analytic loss/dephasing model
/// (tones excluded): variance_at_angle(degrade(pure_variances(x)), theta_sq)
/// plus the dark-noise floor.
double predicted_noise_variance(const SimConfig& config);

/// Suppression of a difference readout relative to the sum readout for tone
/// amplitudes a_lower, a_upper whose phasors differ by phi_error:
/// 20 log10(|a_l + a_u e^{i e}| / |a_l - a_u e^{i e}|). Returns +infinity for
/// perfect cancellation. Throws NumericError if both amplitudes are zero or
/// either is negative.
double cancellation_residual_db(double amp_lower, double amp_upper, double phi_error);

namespace reference {

/// Sample-by-sample serial synthesis. Same streams and arithmetic as
/// twinhet::synthesize; kept to check the parallel kernel.
TimeSeriesPair synthesize(const SimConfig& config);

}  // namespace reference

namespace streams {
inline constexpr std::uint64_t kSqueeze = stream_id("synth/squeeze");
inline constexpr std::uint64_t kLoss = stream_id("synth/loss");
inline constexpr std::uint64_t kJitter = stream_id("synth/jitter");
inline constexpr std::uint64_t kDark = stream_id("synth/dark");
inline constexpr std::uint64_t kAcoustic = stream_id("synth/acoustic");
}  // namespace streams

}  // namespace twinhet
