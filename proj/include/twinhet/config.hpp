#pragma once

// JSON experiment configuration. Every section is optional; missing values
// take the reference-setup defaults (see `twinhet defaults`). Unknown keys
// and type mismatches raise ConfigError naming the JSON pointer of the
// offending value.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinhet/fitter.hpp"
#include "twinhet/sideband.hpp"
#include "twinhet/spectral.hpp"
#include "twinhet/squeezing.hpp"
#include "twinhet/synth.hpp"

namespace twinhet {

struct BudgetPath {
  std::string name;
  std::vector<std::string> components;
  /// Independently measured efficiency to compare against.
  std::optional<Efficiency> measured;
};

struct AnalysisOptions {
  Band band;
  WelchOptions welch;
  /// Half-width of the notch placed around every tone in band averages.
  double notch_half_width_hz = 250.0;
};

struct SweepOptions {
  std::vector<double> x_grid = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int replicates = 3;
  double duration = 1.0;
};

struct FitTolerance {
  double eta_c = 0.02;
  double xi_prime = 1.3e-4;
};

struct ExperimentConfig {
  CarrierLayout carrier;
  LossBudget budget = LossBudget::reference_setup();
  std::vector<BudgetPath> paths;
  /// Squeezed-field path efficiencies and phase noise driving the simulator.
  double eta1 = 1.0;
  double eta2 = 1.0;
  double theta_rms = 0.0;
  PumpOperatingPoint pump;
  /// Fractional pump-power drift over a measurement. Only widens reported
  /// floor ranges; the simulator keeps the pump fixed.
  double pump_power_drift = 0.05;
  PhaseSettings phases;
  std::vector<Tone> tones;
  double sample_rate = 200e3;
  double duration = 2.0;
  std::uint64_t seed = 1;
  bool squeezing = true;
  double jitter_block_seconds = 1e-3;
  double dark_noise_variance = 0.0;
  double acoustic_level = 0.0;
  double acoustic_corner_hz = 10e3;
  AnalysisOptions analysis;
  SweepOptions sweep;
  FitOptions fit;
  FitTolerance tolerance;
  std::string out_dir = "out";

  /// (eta_c, Xi') implied by eta1, eta2 and theta_rms.
  DegradationParams degradation() const;
  /// Simulation settings for a single run.
  SimConfig sim_config() const;
  /// Notches around every configured tone.
  std::vector<Notch> tone_notches() const;
};

/// Parses and validates; `origin` prefixes error messages (usually a path).
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration (all defaults filled in).
nlohmann::json to_json(const ExperimentConfig& config);

/// Hex SHA-256 of the resolved configuration.
std::string config_hash(const ExperimentConfig& config);

/// Default configuration: reference efficiency budget and paths, x = 0.65,
/// eta_c = 0.64 / Xi' = 3.7e-4 with 8 mrad phase noise, 25 kHz tones.
ExperimentConfig default_config();

}  // namespace twinhet
