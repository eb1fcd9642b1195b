#pragma once

// End-to-end recipes behind the CLI verbs. Each writes its artifacts under an
// output directory and returns a summary for the caller to print or check.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinhet/config.hpp"
#include "twinhet/io.hpp"

namespace twinhet {

struct BudgetLine {
  std::string name;
  Efficiency predicted;
  std::optional<Efficiency> measured;
  /// |predicted - measured| exceeds the combined one-sigma error.
  bool disagrees = false;
};

/// Throws ConfigError if the budget or the path list is empty.
std::vector<BudgetLine> budget_report(const ExperimentConfig& config);
std::string format_budget_report(const std::vector<BudgetLine>& lines);
nlohmann::json budget_to_json(const std::vector<BudgetLine>& lines);

struct ModelCurvePoint {
  double x;
  double squeezed_db;
  double antisqueezed_db;
};

/// degrade(pure_variances(x)) in dB over the grid. Throws NumericError for
/// x outside [0, 1).
std::vector<ModelCurvePoint> model_curve(double eta_c, double xi_prime,
                                         const std::vector<double>& x_grid);
std::string model_curve_csv(const std::vector<ModelCurvePoint>& curve, const std::string& hash);

/// Synthesizes one run and writes `<out>/timeseries.{bin,csv}` plus a JSON
/// sidecar. Returns the data file path.
std::filesystem::path run_simulate(const ExperimentConfig& config, const std::filesystem::path& out,
                                   TimeSeriesFormat format = TimeSeriesFormat::binary);

enum class Channel { inphase, quadrature };

struct SpectrumSummary {
  std::filesystem::path file;
  double band_average_db = 0.0;
  std::vector<double> tone_snr_db;
};

/// Welch spectra of each input, normalized to the shot reference: the given
/// reference series if any, otherwise the analytic unit-variance floor. With
/// dark noise configured, the dark floor is subtracted first.
std::vector<SpectrumSummary> run_spectrum(const ExperimentConfig& config,
                                          const std::vector<std::filesystem::path>& inputs,
                                          const std::optional<std::filesystem::path>& reference,
                                          Channel channel, const std::filesystem::path& out);

/// Fits a dataset CSV and writes `<out>/fit.json` and `<out>/fit_curve.csv`.
FitResult run_fit(const ExperimentConfig& config, const std::filesystem::path& dataset,
                  const std::filesystem::path& out);

struct Fig3Run {
  std::string name;
  double phi = 0.0;
  double theta_sq = 0.0;
  bool squeezing = false;
  bool single = false;
  bool tones = true;
};

/// shot, single, sum, diff, sq_sum, sq_diff, antisq_sum.
std::vector<Fig3Run> fig3_runs();

struct Fig3Summary {
  double gain_db = 0.0;
  double predicted_gain_db = 0.0;
  /// Sum-over-difference tone power; a lower bound when the difference tone
  /// is below the detection limit.
  double suppression_db = 0.0;
  bool suppression_is_bound = false;
  double predicted_suppression_db = 0.0;
  double squeezed_suppression_db = 0.0;
  bool squeezed_suppression_is_bound = false;
  double squeezed_floor_db = 0.0;
  double squeezed_floor_quadrature_db = 0.0;
  double antisqueezed_floor_db = 0.0;
  double predicted_squeezed_db = 0.0;
  double predicted_antisqueezed_db = 0.0;
  double shot_floor_db = 0.0;
  /// Largest shift of the predicted floors when pump power moves by the
  /// configured drift (x scales as sqrt of power).
  double squeezed_drift_span_db = 0.0;
  double antisqueezed_drift_span_db = 0.0;
  nlohmann::json runs;
};

/// Seven runs of the twin-interferometer tone experiment: spectra CSVs, their
/// sidecars and summary.{json,csv}.
Fig3Summary reproduce_fig3(const ExperimentConfig& config, const std::filesystem::path& out);

struct Fig2Summary {
  SqueezingDataset dataset;
  FitResult fit;
  double truth_eta_c = 0.0;
  double truth_xi_prime = 0.0;
  bool recovered = false;
};

/// Pump sweep over sweep.x_grid, both quadratures, sweep.replicates each,
/// then a joint fit. Writes dataset.csv, fit.json, model_curve.csv and
/// summary.json.
Fig2Summary reproduce_fig2(const ExperimentConfig& config, const std::filesystem::path& out);

/// Per-run seed derived from the configuration seed and a run label.
std::uint64_t derived_seed(std::uint64_t seed, std::string_view label);

}  // namespace twinhet
