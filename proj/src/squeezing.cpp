#include "twinhet/squeezing.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "twinhet/errors.hpp"

namespace twinhet {

namespace {

void require_pump_x(double x) {
  if (!std::isfinite(x) || x < 0.0 || x >= 1.0) {
    throw NumericError(fmt::format(
        "pump parameter x = {} outside [0, 1) (x >= 1 is at or above oscillation threshold)", x));
  }
}

void require_efficiency(double eta, const char* name) {
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) {
    throw NumericError(fmt::format("{} = {} outside [0, 1]", name, eta));
  }
}

}  // namespace

double x_from_r(double r) {
  if (!std::isfinite(r) || r < 0.0) {
    throw NumericError(fmt::format("squeezing parameter r = {} must be finite and >= 0", r));
  }
  return std::tanh(0.5 * r);
}

double r_from_x(double x) {
  require_pump_x(x);
  return 2.0 * std::atanh(x);
}

PumpOperatingPoint PumpOperatingPoint::from_x(double x) {
  PumpOperatingPoint op;
  op.r = r_from_x(x);
  op.x = x;
  return op;
}

PumpOperatingPoint PumpOperatingPoint::from_r(double r) {
  PumpOperatingPoint op;
  op.x = x_from_r(r);
  op.r = r;
  require_pump_x(op.x);
  return op;
}

PumpOperatingPoint PumpOperatingPoint::from_powers(double pump_power_mw,
                                                   double threshold_power_mw) {
  if (!(threshold_power_mw > 0.0) || !std::isfinite(threshold_power_mw)) {
    throw NumericError(fmt::format("threshold power {} mW must be > 0", threshold_power_mw));
  }
  if (!(pump_power_mw >= 0.0) || pump_power_mw >= threshold_power_mw) {
    throw NumericError(fmt::format("pump power {} mW must lie in [0, threshold = {} mW)",
                                   pump_power_mw, threshold_power_mw));
  }
  PumpOperatingPoint op = from_x(std::sqrt(pump_power_mw / threshold_power_mw));
  op.pump_power_mw = pump_power_mw;
  op.threshold_power_mw = threshold_power_mw;
  return op;
}

void PumpOperatingPoint::validate() const {
  require_pump_x(x);
  if (!std::isfinite(r) || r < 0.0) {
    throw NumericError(fmt::format("squeezing parameter r = {} must be finite and >= 0", r));
  }
  if (std::abs(x - std::tanh(0.5 * r)) > 1e-9) {
    throw NumericError(fmt::format("x = {} and r = {} violate x = tanh(r/2)", x, r));
  }
  if (pump_power_mw.has_value() != threshold_power_mw.has_value()) {
    throw NumericError("pump power and threshold power must be given together");
  }
  if (pump_power_mw) {
    if (!(*threshold_power_mw > 0.0) || *pump_power_mw < 0.0) {
      throw NumericError("pump powers must be non-negative with a positive threshold");
    }
    const double expected = std::sqrt(*pump_power_mw / *threshold_power_mw);
    if (std::abs(expected - x) > 1e-9) {
      throw NumericError(
          fmt::format("x = {} inconsistent with sqrt(P/P_T) = {}", x, expected));
    }
  }
}

VariancePair pure_variances(double x) {
  require_pump_x(x);
  const double up = 1.0 + x;
  const double down = 1.0 - x;
  return {1.0 - 4.0 * x / (up * up), 1.0 + 4.0 * x / (down * down)};
}

VariancePair pure_variances(const PumpOperatingPoint& op_point) {
  return pure_variances(op_point.x);
}

VariancePair pure_variances_from_r(double r) {
  if (!std::isfinite(r) || r < 0.0) {
    throw NumericError(fmt::format("squeezing parameter r = {} must be finite and >= 0", r));
  }
  return {std::exp(-2.0 * r), std::exp(2.0 * r)};
}

double variance_at_angle(const VariancePair& v, double theta_sq) {
  const double c = std::cos(theta_sq);
  const double s = std::sin(theta_sq);
  return v.v_minus * c * c + v.v_plus * s * s;
}

double dephasing_from_efficiencies(double eta1, double eta2) {
  if (!(eta1 > 0.0) || !(eta2 > 0.0) || eta1 > 1.0 || eta2 > 1.0) {
    throw NumericError(
        fmt::format("path efficiencies must lie in (0, 1], got {} and {}", eta1, eta2));
  }
  const double diff = std::sqrt(eta1) - std::sqrt(eta2);
  return diff * diff / (2.0 * (eta1 + eta2));
}

double effective_dephasing(double xi, double theta_rms) {
  if (!(xi >= 0.0 && xi <= 0.5)) {
    throw NumericError(fmt::format("dephasing Xi = {} outside [0, 0.5]", xi));
  }
  if (!(theta_rms >= 0.0) || !std::isfinite(theta_rms)) {
    throw NumericError(fmt::format("theta_rms = {} must be finite and >= 0", theta_rms));
  }
  const double t2 = theta_rms * theta_rms;
  const double xi_prime = xi + t2 - 2.0 * xi * t2;
  if (xi_prime > 0.5) {
    throw NumericError(fmt::format(
        "effective dephasing {} exceeds 0.5 (theta_rms = {} rad too large)", xi_prime, theta_rms));
  }
  return xi_prime;
}

DegradationParams DegradationParams::from_efficiencies(double eta1, double eta2,
                                                       double theta_rms) {
  DegradationParams d;
  d.xi_ = dephasing_from_efficiencies(eta1, eta2);
  d.eta1_ = eta1;
  d.eta2_ = eta2;
  d.theta_rms_ = theta_rms;
  d.eta_c_ = 0.5 * (eta1 + eta2);
  d.xi_prime_ = effective_dephasing(*d.xi_, theta_rms);
  return d;
}

DegradationParams DegradationParams::from_common(double eta_c, double xi_prime) {
  require_efficiency(eta_c, "common efficiency eta_c");
  if (!(xi_prime >= 0.0 && xi_prime <= 0.5)) {
    throw NumericError(fmt::format("effective dephasing Xi' = {} outside [0, 0.5]", xi_prime));
  }
  DegradationParams d;
  d.eta_c_ = eta_c;
  d.xi_prime_ = xi_prime;
  return d;
}

VariancePair degrade(const VariancePair& v, double eta_c, double xi_prime) {
  const double keep = 1.0 - xi_prime;
  return {eta_c * (keep * v.v_minus + xi_prime * v.v_plus) + (1.0 - eta_c),
          eta_c * (keep * v.v_plus + xi_prime * v.v_minus) + (1.0 - eta_c)};
}

VariancePair degrade(const VariancePair& v, const DegradationParams& d) {
  return degrade(v, d.eta_c(), d.xi_prime());
}

LossBudget::LossBudget(std::map<std::string, Efficiency> components)
    : components_(std::move(components)) {
  for (const auto& [name, eff] : components_) {
    if (!(eff.value >= 0.0 && eff.value <= 1.0)) {
      throw ConfigError(fmt::format("budget component '{}': efficiency {} outside [0, 1]", name,
                                    eff.value));
    }
    if (!(eff.uncertainty >= 0.0) || !std::isfinite(eff.uncertainty)) {
      throw ConfigError(fmt::format("budget component '{}': uncertainty {} must be >= 0", name,
                                    eff.uncertainty));
    }
  }
}

LossBudget LossBudget::reference_setup() {
  return LossBudget({
      {"opo_escape", {0.98, 0.01}},
      {"injection_path", {0.97, 0.01}},
      {"faraday_single_pass", {0.95, 0.01}},
      {"detector_contrast", {0.97, 0.01}},
      {"quantum_efficiency", {0.90, 0.02}},
      {"interferometer", {0.95, 0.02}},
      {"combining_cavity_single_pass", {0.96, 0.01}},
  });
}

const std::vector<std::string>& LossBudget::canonical_components() {
  static const std::vector<std::string> names = {
      "opo_escape",         "injection_path", "faraday_single_pass",
      "detector_contrast",  "quantum_efficiency", "interferometer",
      "combining_cavity_single_pass"};
  return names;
}

const Efficiency& LossBudget::at(const std::string& name) const {
  auto it = components_.find(name);
  if (it == components_.end()) {
    throw ConfigError(fmt::format("unknown budget component '{}'", name));
  }
  return it->second;
}

Efficiency path_efficiency(const LossBudget& budget, const std::vector<std::string>& path) {
  std::map<std::string, int> passes;
  double product = 1.0;
  for (const auto& name : path) {
    product *= budget.at(name).value;
    ++passes[name];
  }
  double rel2 = 0.0;
  for (const auto& [name, count] : passes) {
    const Efficiency& e = budget.at(name);
    if (e.value == 0.0) continue;
    const double rel = count * e.uncertainty / e.value;
    rel2 += rel * rel;
  }
  return {product, product * std::sqrt(rel2)};
}

std::vector<std::string> reference_signal_path() {
  return {"interferometer", "combining_cavity_single_pass", "faraday_single_pass",
          "detector_contrast", "quantum_efficiency"};
}

std::vector<std::string> reference_squeezing_path() {
  return {"opo_escape",
          "injection_path",
          "faraday_single_pass",
          "combining_cavity_single_pass",
          "interferometer",
          "combining_cavity_single_pass",
          "faraday_single_pass",
          "detector_contrast",
          "quantum_efficiency"};
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace twinhet
