#pragma once

// Nonlinear least-squares estimation of the common efficiency eta_c and the
// effective dephasing Xi' from squeezing / antisqueezing noise levels measured
// against pump parameter, and the inversions that turn a fit back into path
// efficiencies or phase noise.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "twinhet/errors.hpp"
#include "twinhet/rng.hpp"

namespace twinhet {

enum class Quadrature { squeezed, antisqueezed };

struct SqueezingPoint {
  double x = 0.0;
  Quadrature quadrature = Quadrature::squeezed;
  /// Noise power in dB relative to shot noise.
  double noise_db = 0.0;
  double weight = 1.0;
  /// Number of measurements averaged into noise_db; scales the weight.
  int replicates = 1;
};

struct SqueezingDataset {
  std::vector<SqueezingPoint> points;

  std::size_t distinct_x() const;
  bool has_both_quadratures() const;
  /// Throws NumericError for out-of-range points, fewer than three distinct x
  /// values, or non-positive weights.
  void validate() const;
};

/// Model prediction 10 log10(V') for one point.
double model_db(double x, Quadrature quadrature, double eta_c, double xi_prime);

struct FitOptions {
  /// Starting (eta_c, Xi').
  std::array<double, 2> init = {0.7, 1e-4};
  /// Additional Xi' seeds, log-spaced over [1e-6, 1e-2]; 0 disables multi-start.
  int xi_seeds = 5;
  int max_iterations = 200;
  /// Asymmetric Xi' bounds from a profile-likelihood scan (delta chi^2 = 1).
  bool profile_bounds = true;
  /// Residual-bootstrap replicas (0 = off), run in parallel.
  int bootstrap_replicas = 0;
  std::uint64_t bootstrap_seed = 1;
  /// Called with (eta_c, Xi') after every accepted optimizer step.
  std::function<void(double, double)> on_accepted_step;
};

struct FitResult {
  double eta_c = 0.0;
  double eta_c_error = 0.0;
  double xi_prime = 0.0;
  /// Profile-likelihood interval [xi_prime_lower, xi_prime_upper]; equals the
  /// covariance interval when profiling is off.
  double xi_prime_lower = 0.0;
  double xi_prime_upper = 0.0;
  /// Symmetric one-sigma Xi' error from the covariance matrix.
  double xi_prime_error = 0.0;
  /// sqrt of the weighted residual sum of squares, dB.
  double residual_norm = 0.0;
  /// Residual variance per degree of freedom, dB^2.
  double residual_variance = 0.0;
  std::array<std::array<double, 2>, 2> covariance{};
  int iterations = 0;
  bool converged = false;
  bool joint = false;
  std::size_t points = 0;
  std::optional<double> bootstrap_eta_c_sd;
  std::optional<double> bootstrap_xi_prime_sd;

  double xi_prime_error_minus() const { return xi_prime - xi_prime_lower; }
  double xi_prime_error_plus() const { return xi_prime_upper - xi_prime; }
};

/// Bounded Levenberg-Marquardt fit of (eta_c, Xi') in the dB domain over
/// [0, 1] x [0, 0.5]. Deterministic for a given dataset and options, and
/// independent of point order. Throws NumericError for degenerate datasets.
FitResult fit_dephasing_model(const SqueezingDataset& data, const FitOptions& options = {});

/// Raised when phase noise alone accounts for more than the fitted dephasing.
class PhaseNoiseDominated : public NumericError {
 public:
  using NumericError::NumericError;
};

struct EfficiencyPair {
  double eta1 = 0.0;
  double eta1_error = 0.0;
  double eta2 = 0.0;
  double eta2_error = 0.0;
};

/// Splits a common efficiency into the two path efficiencies (eta1 <= eta2)
/// given an assumed phase noise: Xi = (Xi' - theta^2) / (1 - 2 theta^2),
/// eta_{1,2} = eta_c -/+ eta_c sqrt(1 - (1 - 2 Xi)^2). Errors are first-order
/// propagations of eta_c_error and the mean Xi' error.
EfficiencyPair invert_dephasing(const FitResult& fit, double assumed_theta_rms);
EfficiencyPair invert_dephasing(double eta_c, double xi_prime, double assumed_theta_rms,
                                double eta_c_error = 0.0, double xi_prime_error = 0.0);

struct PhaseNoiseEstimate {
  double theta_rms = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// theta_rms = sqrt((Xi' - Xi) / (1 - 2 Xi)), with bounds from the Xi'
/// interval; negative radicands clamp to 0.
PhaseNoiseEstimate theta_rms_from_fit(const FitResult& fit, double assumed_xi = 0.0);

/// Forward-model dataset: for each x and both quadratures, `replicates`
/// points with Gaussian dB noise of standard deviation noise_db drawn from
/// `rng` (index offset `first_index`).
SqueezingDataset model_dataset(double eta_c, double xi_prime, std::span<const double> x_grid,
                               int replicates, double noise_db, const RngStream& rng,
                               std::uint64_t first_index = 0);

}  // namespace twinhet
