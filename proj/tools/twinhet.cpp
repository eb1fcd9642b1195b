// twinhet: command-line front end.
//
// Exit codes: 0 ok, 1 usage, 2 config, 3 numeric, 4 I/O.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "twinhet/config.hpp"
#include "twinhet/errors.hpp"
#include "twinhet/io.hpp"
#include "twinhet/pipelines.hpp"

namespace fs = std::filesystem;
using namespace twinhet;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out;
  std::string band;
};

Band parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError(fmt::format("--band: expected LO:HI, got '{}'", text));
  try {
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    if (!(lo >= 0.0 && hi > lo)) throw ConfigError("");
    return {lo, hi};
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("--band: expected LO:HI with 0 <= LO < HI, got '{}'", text));
  }
}

ExperimentConfig resolve(const GlobalOptions& g) {
  ExperimentConfig cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (!g.band.empty()) cfg.analysis.band = parse_band(g.band);
  if (g.jobs > 0) omp_set_num_threads(g.jobs);
  return cfg;
}

void print_fig3(const Fig3Summary& s) {
  fmt::print("gain            {:8.3f} dB (predicted {:.3f})\n", s.gain_db, s.predicted_gain_db);
  fmt::print("suppression     {}{:7.3f} dB (predicted {:.3f})\n", s.suppression_is_bound ? ">" : " ",
             s.suppression_db, s.predicted_suppression_db);
  fmt::print("sq suppression  {}{:7.3f} dB\n", s.squeezed_suppression_is_bound ? ">" : " ",
             s.squeezed_suppression_db);
  fmt::print("squeezed floor  {:8.3f} dB (predicted {:.3f}; quadrature current {:.3f})\n",
             s.squeezed_floor_db, s.predicted_squeezed_db, s.squeezed_floor_quadrature_db);
  fmt::print("antisq floor    {:8.3f} dB (predicted {:.3f})\n", s.antisqueezed_floor_db,
             s.predicted_antisqueezed_db);
  fmt::print("pump drift span +-{:.3f} dB squeezed, +-{:.3f} dB antisqueezed\n", s.squeezed_drift_span_db,
             s.antisqueezed_drift_span_db);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-carrier heterodyne readout with two-mode squeezing: simulation, spectra and fits"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override the configured seed");
  app.add_option("--jobs", g.jobs, "Worker threads (default: OpenMP default)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory (default from config)");
  app.add_option("--band", g.band, "Analysis band LO:HI in Hz");

  auto* budget = app.add_subcommand("budget", "Path efficiency products against measured values");
  bool budget_json = false;
  budget->add_flag("--json", budget_json, "Print JSON instead of a table");

  auto* curve = app.add_subcommand("model-curve", "Squeezed/antisqueezed levels over a pump grid");
  std::vector<double> curve_grid;
  std::optional<double> curve_eta, curve_xi;
  curve->add_option("--x", curve_grid, "Pump parameters (default 0 to 0.95)")->delimiter(',');
  curve->add_option("--eta-c", curve_eta, "Common efficiency (default from config)");
  curve->add_option("--xi-prime", curve_xi, "Effective dephasing (default from config)");

  auto* simulate = app.add_subcommand("simulate", "Synthesize demodulated photocurrents");
  std::string sim_format = "binary";
  simulate->add_option("--format", sim_format, "binary or csv")
      ->check(CLI::IsMember({"binary", "csv"}));

  auto* spectrum = app.add_subcommand("spectrum", "Shot-normalized Welch spectra of time-series files");
  std::vector<std::string> spec_inputs;
  std::string spec_reference, spec_channel = "inphase";
  spectrum->add_option("inputs", spec_inputs, "Time-series files")->required();
  spectrum->add_option("--reference", spec_reference, "Shot-noise time series (default: analytic)");
  spectrum->add_option("--channel", spec_channel, "inphase or quadrature")
      ->check(CLI::IsMember({"inphase", "quadrature"}));

  auto* fit = app.add_subcommand("fit", "Fit eta_c and Xi' to a squeezing dataset CSV");
  std::string fit_input;
  fit->add_option("dataset", fit_input, "Dataset CSV")->required();

  auto* fig2 = app.add_subcommand("reproduce-fig2", "Pump sweep, both quadratures, joint fit");
  auto* fig3 = app.add_subcommand("reproduce-fig3", "Twin-interferometer tone runs and spectra");
  auto* defaults = app.add_subcommand("defaults", "Print the fully resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const ExperimentConfig cfg = resolve(g);
    const fs::path out = cfg.out_dir;

    if (*budget) {
      const auto lines = budget_report(cfg);
      if (budget_json) {
        fmt::print("{}\n", budget_to_json(lines).dump(2));
      } else {
        fmt::print("{}", format_budget_report(lines));
      }
    } else if (*curve) {
      const DegradationParams d = cfg.degradation();
      std::vector<double> grid = curve_grid;
      if (grid.empty()) {
        for (int i = 0; i <= 95; ++i) grid.push_back(i / 100.0);
      }
      const auto points = model_curve(curve_eta.value_or(d.eta_c()), curve_xi.value_or(d.xi_prime()), grid);
      const std::string csv = model_curve_csv(points, config_hash(cfg));
      if (g.out.empty()) {
        fmt::print("{}", csv);
      } else {
        write_text_file(out / "model_curve.csv", csv);
      }
    } else if (*simulate) {
      const auto file = run_simulate(cfg, out, sim_format == "csv" ? TimeSeriesFormat::csv : TimeSeriesFormat::binary);
      fmt::print("{}\n", file.string());
    } else if (*spectrum) {
      std::vector<fs::path> inputs(spec_inputs.begin(), spec_inputs.end());
      std::optional<fs::path> reference;
      if (!spec_reference.empty()) reference = spec_reference;
      const auto summaries = run_spectrum(cfg, inputs, reference,
                                          spec_channel == "inphase" ? Channel::inphase : Channel::quadrature, out);
      for (const auto& s : summaries) {
        fmt::print("{}  band average {:.3f} dB", s.file.string(), s.band_average_db);
        for (double snr : s.tone_snr_db) fmt::print("  tone SNR {:.2f} dB", snr);
        fmt::print("\n");
      }
    } else if (*fit) {
      const FitResult r = run_fit(cfg, fit_input, out);
      fmt::print("eta_c    = {:.4f} +- {:.4f}\n", r.eta_c, r.eta_c_error);
      fmt::print("xi_prime = {:.3e} (+{:.2e} / -{:.2e})\n", r.xi_prime, r.xi_prime_error_plus(),
                 r.xi_prime_error_minus());
      fmt::print("residual = {:.4f} dB rms, {} points, {}\n", std::sqrt(r.residual_variance), r.points,
                 r.converged ? "converged" : "NOT converged");
    } else if (*fig2) {
      const Fig2Summary s = reproduce_fig2(cfg, out);
      fmt::print("truth    eta_c {:.4f}  xi' {:.3e}\n", s.truth_eta_c, s.truth_xi_prime);
      fmt::print("fitted   eta_c {:.4f}  xi' {:.3e} (+{:.2e} / -{:.2e})\n", s.fit.eta_c, s.fit.xi_prime,
                 s.fit.xi_prime_error_plus(), s.fit.xi_prime_error_minus());
      fmt::print("recovered within tolerance: {}\n", s.recovered ? "yes" : "no");
    } else if (*fig3) {
      print_fig3(reproduce_fig3(cfg, out));
    } else if (*defaults) {
      fmt::print("{}\n", to_json(cfg).dump(2));
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric error: {}\n", e.what());
    return kNumeric;
  } catch (const IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNumeric;
  }
  return kOk;
}
