#pragma once

// Analytic two-mode squeezing model: pure squeezed/antisqueezed variances as a
// function of pump strength, quadrature-angle mixing, degradation by loss and
// dephasing, and optical efficiency budgets.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinhet {

/// x = tanh(r / 2). Throws NumericError for r < 0 or non-finite r.
double x_from_r(double r);
/// r = 2 artanh(x). Throws NumericError unless 0 <= x < 1.
double r_from_x(double x);

/// Pump operating point. x is the pump amplitude normalized to threshold,
/// sqrt(P / P_T); r the squeezing parameter.
struct PumpOperatingPoint {
  double x = 0.0;
  double r = 0.0;
  std::optional<double> pump_power_mw;
  std::optional<double> threshold_power_mw;

  static PumpOperatingPoint from_x(double x);
  static PumpOperatingPoint from_r(double r);
  static PumpOperatingPoint from_powers(double pump_power_mw, double threshold_power_mw);

  /// Throws NumericError if x, r and the optional powers are out of range or
  /// mutually inconsistent (1e-9).
  void validate() const;
};

/// Noise variances in shot-noise units (1 = vacuum).
struct VariancePair {
  double v_minus = 1.0;
  double v_plus = 1.0;
};

/// V- = 1 - 4x/(1+x)^2, V+ = 1 + 4x/(1-x)^2. Throws NumericError for x outside
/// [0, 1).
VariancePair pure_variances(const PumpOperatingPoint& op_point);
VariancePair pure_variances(double x);
/// Exponential form V-/+ = exp(-/+ 2r); identical to the rational form.
VariancePair pure_variances_from_r(double r);

/// V = V- cos^2(theta) + V+ sin^2(theta).
double variance_at_angle(const VariancePair& v, double theta_sq);

/// Xi = (eta1 + eta2 - 2 sqrt(eta1 eta2)) / (2 (eta1 + eta2)), evaluated as
/// (sqrt(eta1) - sqrt(eta2))^2 / (2 (eta1 + eta2)) to avoid cancellation.
/// Throws NumericError unless both efficiencies are in (0, 1].
double dephasing_from_efficiencies(double eta1, double eta2);

/// Xi' = Xi + theta^2 - 2 Xi theta^2. Throws NumericError if Xi is outside
/// [0, 0.5], theta_rms < 0, or the result leaves [0, 0.5].
double effective_dephasing(double xi, double theta_rms);

/// Loss and dephasing parameters. Built either from the two path efficiencies
/// plus phase noise (all fields known) or from fitted (eta_c, Xi') with the
/// individual efficiencies left unknown.
class DegradationParams {
 public:
  static DegradationParams from_efficiencies(double eta1, double eta2, double theta_rms = 0.0);
  static DegradationParams from_common(double eta_c, double xi_prime);

  double eta_c() const { return eta_c_; }
  double xi_prime() const { return xi_prime_; }
  std::optional<double> eta1() const { return eta1_; }
  std::optional<double> eta2() const { return eta2_; }
  std::optional<double> xi() const { return xi_; }
  std::optional<double> theta_rms() const { return theta_rms_; }

 private:
  DegradationParams() = default;

  double eta_c_ = 1.0;
  double xi_prime_ = 0.0;
  std::optional<double> eta1_;
  std::optional<double> eta2_;
  std::optional<double> xi_;
  std::optional<double> theta_rms_;
};

/// V'-/+ = eta_c [(1 - Xi') V-/+ + Xi' V+/-] + (1 - eta_c).
VariancePair degrade(const VariancePair& v, const DegradationParams& d);
VariancePair degrade(const VariancePair& v, double eta_c, double xi_prime);

/// An efficiency with absolute one-sigma uncertainty.
struct Efficiency {
  double value = 1.0;
  double uncertainty = 0.0;
};

/// Component efficiencies by name. Canonical names: opo_escape,
/// injection_path, faraday_single_pass, detector_contrast, quantum_efficiency,
/// interferometer, combining_cavity_single_pass.
class LossBudget {
 public:
  LossBudget() = default;
  explicit LossBudget(std::map<std::string, Efficiency> components);

  /// Component values of the reference twin-interferometer setup.
  static LossBudget reference_setup();

  static const std::vector<std::string>& canonical_components();

  const std::map<std::string, Efficiency>& components() const { return components_; }
  bool empty() const { return components_.empty(); }
  /// Throws ConfigError for unknown names.
  const Efficiency& at(const std::string& name) const;

 private:
  std::map<std::string, Efficiency> components_;
};

/// Product of the named component efficiencies along `path` (components may
/// repeat for double passes). The relative uncertainty is the first-order
/// quadrature sum over distinct components; a component traversed k times
/// contributes k times its relative error. Empty path -> 1 +- 0.
Efficiency path_efficiency(const LossBudget& budget, const std::vector<std::string>& path);

/// Paths through the reference setup.
std::vector<std::string> reference_signal_path();
std::vector<std::string> reference_squeezing_path();

/// Converts linear power ratio to dB and back.
double to_db(double linear);
double from_db(double db);

}  // namespace twinhet
