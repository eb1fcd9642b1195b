#include "twinhet/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/format.h>

#include "twinhet/errors.hpp"

namespace twinhet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> fine_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 95; ++i) grid.push_back(i / 100.0);
  return grid;
}

PowerSpectrum channel_psd(const TimeSeriesPair& series, Channel channel, const ExperimentConfig& cfg) {
  const auto& data = channel == Channel::inphase ? series.i_inphase : series.i_quadrature;
  PowerSpectrum spec = welch_psd(data, series.sample_rate, cfg.analysis.welch);
  if (cfg.dark_noise_variance > 0.0) {
    spec = subtract_dark_noise(spec, white_noise_reference(spec, cfg.dark_noise_variance),
                               cfg.analysis.band);
  }
  return spec;
}

std::string channel_name(Channel c) { return c == Channel::inphase ? "inphase" : "quadrature"; }

/// Net tone phasors of the lower and upper carriers at `freq`.
std::pair<std::complex<double>, std::complex<double>> tone_phasors(const std::vector<Tone>& tones,
                                                                   double freq) {
  std::complex<double> lower, upper;
  for (const Tone& t : tones) {
    if (t.quadrature != ToneQuadrature::amplitude || t.frequency != freq) continue;
    (t.target == ToneTarget::lower ? lower : upper) += std::polar(t.amplitude, t.phase);
  }
  return {lower, upper};
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

std::uint64_t derived_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(seed ^ stream_id(label));
}

std::vector<BudgetLine> budget_report(const ExperimentConfig& config) {
  if (config.budget.empty()) throw ConfigError("budget: no components defined");
  if (config.paths.empty()) throw ConfigError("budget: no paths defined");
  std::vector<BudgetLine> lines;
  for (const auto& path : config.paths) {
    BudgetLine line;
    line.name = path.name;
    try {
      line.predicted = path_efficiency(config.budget, path.components);
    } catch (const Error& e) {
      throw ConfigError(fmt::format("budget path '{}': {}", path.name, e.what()));
    }
    line.measured = path.measured;
    if (line.measured) {
      const double sigma = std::hypot(line.predicted.uncertainty, line.measured->uncertainty);
      line.disagrees = std::abs(line.predicted.value - line.measured->value) > sigma;
    }
    lines.push_back(line);
  }
  return lines;
}

std::string format_budget_report(const std::vector<BudgetLine>& lines) {
  std::string out = fmt::format("{:<20} {:>16} {:>16}  {}\n", "path", "predicted", "measured", "status");
  for (const auto& l : lines) {
    const std::string pred = fmt::format("{:.3f} +- {:.3f}", l.predicted.value, l.predicted.uncertainty);
    const std::string meas =
        l.measured ? fmt::format("{:.3f} +- {:.3f}", l.measured->value, l.measured->uncertainty) : "-";
    const char* status = !l.measured ? "" : l.disagrees ? "DISAGREES" : "ok";
    out += fmt::format("{:<20} {:>16} {:>16}  {}\n", l.name, pred, meas, status);
  }
  return out;
}

json budget_to_json(const std::vector<BudgetLine>& lines) {
  json arr = json::array();
  for (const auto& l : lines) {
    json j = {{"path", l.name},
              {"predicted", l.predicted.value},
              {"predicted_uncertainty", l.predicted.uncertainty}};
    if (l.measured) {
      j["measured"] = l.measured->value;
      j["measured_uncertainty"] = l.measured->uncertainty;
      j["disagrees"] = l.disagrees;
    }
    arr.push_back(j);
  }
  return arr;
}

std::vector<ModelCurvePoint> model_curve(double eta_c, double xi_prime, const std::vector<double>& x_grid) {
  std::vector<ModelCurvePoint> curve;
  for (double x : x_grid) {
    if (!(x >= 0.0 && x < 1.0)) throw NumericError(fmt::format("model curve: x = {} outside [0, 1)", x));
    const VariancePair v = degrade(pure_variances(x), eta_c, xi_prime);
    curve.push_back({x, to_db(v.v_minus), to_db(v.v_plus)});
  }
  return curve;
}

std::string model_curve_csv(const std::vector<ModelCurvePoint>& curve, const std::string& hash) {
  std::string out = fmt::format("# config_hash={}\nx,squeezed_db,antisqueezed_db\n", hash);
  for (const auto& p : curve) out += fmt::format("{},{},{}\n", p.x, p.squeezed_db, p.antisqueezed_db);
  return out;
}

fs::path run_simulate(const ExperimentConfig& config, const fs::path& out, TimeSeriesFormat format) {
  const SimConfig sim = config.sim_config();
  const TimeSeriesPair series = synthesize(sim);
  const std::string hash = config_hash(config);
  const fs::path file = out / (format == TimeSeriesFormat::binary ? "timeseries.bin" : "timeseries.csv");
  write_time_series(file, series, format, hash);
  write_json_file(fs::path(file.string() + ".json"),
                  {{"config_hash", hash},
                   {"seed", sim.seed},
                   {"samples", series.size()},
                   {"sample_rate_hz", series.sample_rate},
                   {"predicted_variance", predicted_noise_variance(sim)},
                   {"format", format == TimeSeriesFormat::binary ? "binary" : "csv"},
                   {"config", to_json(config)}});
  return file;
}

std::vector<SpectrumSummary> run_spectrum(const ExperimentConfig& config, const std::vector<fs::path>& inputs,
                                          const std::optional<fs::path>& reference, Channel channel,
                                          const fs::path& out) {
  if (inputs.empty()) throw ConfigError("spectrum: no input files");
  const std::string hash = config_hash(config);
  std::optional<PowerSpectrum> shot;
  std::string shot_source = "analytic";
  if (reference) {
    shot = channel_psd(read_time_series(*reference).series, channel, config);
    shot_source = reference->filename().string();
  }
  const auto notches = config.tone_notches();
  std::vector<SpectrumSummary> summaries;
  for (const fs::path& input : inputs) {
    const TimeSeriesFile file = read_time_series(input);
    PowerSpectrum spec;
    try {
      spec = channel_psd(file.series, channel, config);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("{}: {}", input.string(), e.what()));
    }
    const PowerSpectrum ref = shot ? *shot : white_noise_reference(spec, 1.0);
    const SpectrumRecord rec = normalize_to_shot(spec, ref, config.analysis.band);
    SpectrumSummary s;
    s.file = out / fmt::format("{}_{}.csv", input.stem().string(), channel_name(channel));
    s.band_average_db = band_average(rec, config.analysis.band, notches);
    json tones = json::array();
    for (const Tone& t : config.tones) {
      if (t.frequency >= rec.freqs.back()) continue;
      const double snr = tone_snr(rec, t.frequency);
      s.tone_snr_db.push_back(snr);
      tones.push_back({{"frequency_hz", t.frequency}, {"snr_db", snr}});
    }
    write_spectrum(s.file, rec, hash,
                   {{"source", input.filename().string()},
                    {"source_config_hash", file.config_hash},
                    {"channel", channel_name(channel)},
                    {"shot_reference", shot_source},
                    {"band_hz", {config.analysis.band.lo_hz, config.analysis.band.hi_hz}},
                    {"band_average_db", s.band_average_db},
                    {"tones", tones}});
    summaries.push_back(std::move(s));
  }
  return summaries;
}

FitResult run_fit(const ExperimentConfig& config, const fs::path& dataset, const fs::path& out) {
  const SqueezingDataset data = read_dataset(dataset);
  const FitResult fit = fit_dephasing_model(data, config.fit);
  const std::string hash = config_hash(config);
  json doc = fit_to_json(fit);
  doc["config_hash"] = hash;
  doc["dataset"] = dataset.filename().string();
  try {
    const EfficiencyPair eff = invert_dephasing(fit, config.theta_rms);
    doc["efficiencies"] = {{"assumed_theta_rms", config.theta_rms},
                           {"eta1", eff.eta1},
                           {"eta1_error", eff.eta1_error},
                           {"eta2", eff.eta2},
                           {"eta2_error", eff.eta2_error}};
  } catch (const PhaseNoiseDominated& e) {
    doc["efficiencies"] = {{"assumed_theta_rms", config.theta_rms}, {"error", e.what()}};
  }
  const PhaseNoiseEstimate pn = theta_rms_from_fit(fit);
  doc["phase_noise_if_no_differential_loss"] = {
      {"theta_rms", pn.theta_rms}, {"lower", pn.lower}, {"upper", pn.upper}};
  write_json_file(out / "fit.json", doc);
  write_text_file(out / "fit_curve.csv", model_curve_csv(model_curve(fit.eta_c, fit.xi_prime, fine_grid()), hash));
  return fit;
}

std::vector<Fig3Run> fig3_runs() {
  return {
      {"shot", 0.0, 0.0, false, false, false},
      {"single", 0.0, 0.0, false, true, true},
      {"sum", 0.0, 0.0, false, false, true},
      {"diff", kPi, 0.0, false, false, true},
      {"sq_sum", 0.0, 0.0, true, false, true},
      {"sq_diff", kPi, 0.0, true, false, true},
      {"antisq_sum", 0.0, kPi / 2, true, false, true},
  };
}

Fig3Summary reproduce_fig3(const ExperimentConfig& config, const fs::path& out) {
  if (config.tones.empty()) throw ConfigError("reproduce-fig3: at least one tone is required");
  const double tone_freq = config.tones.front().frequency;
  const auto [lower, upper] = tone_phasors(config.tones, tone_freq);
  if (std::abs(lower) == 0.0) {
    throw ConfigError("reproduce-fig3: the first tone frequency needs a lower-carrier amplitude tone");
  }
  const std::string hash = config_hash(config);
  const auto notches = config.tone_notches();
  const Band band = config.analysis.band;

  struct Measured {
    Fig3Run run;
    SimConfig sim;
    PowerSpectrum spec;
    double floor_db = 0.0;
    double predicted_db = 0.0;
    std::optional<ToneMeasurement> tone;
    std::optional<double> snr_db;
  };
  std::vector<Measured> results;
  std::optional<PowerSpectrum> shot;
  std::optional<PowerSpectrum> sq_sum_quadrature;

  for (const Fig3Run& run : fig3_runs()) {
    Measured m{run, config.sim_config(), {}, 0.0, 0.0, std::nullopt, std::nullopt};
    m.sim.seed = derived_seed(config.seed, "fig3/" + run.name);
    m.sim.squeezing = run.squeezing;
    m.sim.phases = PhaseSettings(config.phases.theta_lo(), run.phi, run.theta_sq);
    if (!run.tones) {
      m.sim.tones.clear();
    } else if (run.single) {
      std::erase_if(m.sim.tones, [](const Tone& t) { return t.target != ToneTarget::lower; });
    }
    const TimeSeriesPair series = synthesize(m.sim);
    m.spec = channel_psd(series, Channel::inphase, config);
    if (run.name == "shot") shot = m.spec;
    if (run.name == "sq_sum") sq_sum_quadrature = channel_psd(series, Channel::quadrature, config);
    m.predicted_db = to_db(predicted_noise_variance(m.sim) - config.dark_noise_variance);
    results.push_back(std::move(m));
  }

  Fig3Summary summary;
  summary.runs = json::array();
  std::string csv = fmt::format(
      "# config_hash={}\nrun,phi,theta_sq,squeezing,tones,floor_db,predicted_floor_db,tone_power,"
      "tone_detection_limit,tone_snr_db\n",
      hash);
  for (Measured& m : results) {
    const SpectrumRecord rec = normalize_to_shot(m.spec, *shot, band);
    m.floor_db = band_average(rec, band, notches);
    if (m.run.tones) {
      m.tone = measure_tone(m.spec, tone_freq);
      m.snr_db = tone_snr(rec, tone_freq);
    }
    const std::string tones_label = !m.run.tones ? "none" : m.run.single ? "lower" : "both";
    json meta = {{"run", m.run.name},
                 {"seed", m.sim.seed},
                 {"phi", m.run.phi},
                 {"theta_sq", m.run.theta_sq},
                 {"squeezing", m.run.squeezing},
                 {"tones", tones_label},
                 {"floor_db", m.floor_db},
                 {"predicted_floor_db", m.predicted_db}};
    if (m.tone) {
      meta["tone_power"] = m.tone->power;
      meta["tone_detection_limit"] = m.tone->detection_limit;
      meta["tone_snr_db"] = *m.snr_db;
    }
    write_spectrum(out / fmt::format("fig3_{}.csv", m.run.name), rec, hash, meta);
    summary.runs.push_back(meta);
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", m.run.name, m.run.phi, m.run.theta_sq,
                       m.run.squeezing ? 1 : 0, tones_label, m.floor_db, m.predicted_db,
                       opt_number(m.tone ? std::optional(m.tone->power) : std::nullopt),
                       opt_number(m.tone ? std::optional(m.tone->detection_limit) : std::nullopt),
                       opt_number(m.snr_db));
  }

  auto find = [&](const std::string& name) -> const Measured& {
    for (const auto& m : results)
      if (m.run.name == name) return m;
    throw Error("reproduce-fig3: missing run " + name);
  };
  auto suppression = [&](const Measured& sum, const Measured& diff, bool& is_bound) {
    const double limit = diff.tone->detection_limit;
    is_bound = diff.tone->power <= limit;
    return 10.0 * std::log10(sum.tone->power / (is_bound ? limit : diff.tone->power));
  };

  summary.shot_floor_db = find("shot").floor_db;
  summary.gain_db = 10.0 * std::log10(find("sum").tone->power / find("single").tone->power);
  summary.predicted_gain_db = 20.0 * std::log10(std::abs(lower + upper) / std::abs(lower));
  summary.suppression_db = suppression(find("sum"), find("diff"), summary.suppression_is_bound);
  summary.predicted_suppression_db =
      cancellation_residual_db(std::abs(lower), std::abs(upper), std::arg(upper) - std::arg(lower));
  summary.squeezed_suppression_db =
      suppression(find("sq_sum"), find("sq_diff"), summary.squeezed_suppression_is_bound);
  summary.squeezed_floor_db = find("sq_sum").floor_db;
  summary.antisqueezed_floor_db = find("antisq_sum").floor_db;
  summary.predicted_squeezed_db = find("sq_sum").predicted_db;
  summary.predicted_antisqueezed_db = find("antisq_sum").predicted_db;
  summary.squeezed_floor_quadrature_db =
      band_average(normalize_to_shot(*sq_sum_quadrature, *shot, band), band, notches);
  {
    const DegradationParams d = config.degradation();
    const VariancePair nominal = degrade(pure_variances(config.pump.x), d);
    for (double sign : {-1.0, 1.0}) {
      const double x = std::min(config.pump.x * std::sqrt(1.0 + sign * config.pump_power_drift), 0.999999);
      const VariancePair v = degrade(pure_variances(x), d);
      summary.squeezed_drift_span_db =
          std::max(summary.squeezed_drift_span_db, std::abs(to_db(v.v_minus) - to_db(nominal.v_minus)));
      summary.antisqueezed_drift_span_db =
          std::max(summary.antisqueezed_drift_span_db, std::abs(to_db(v.v_plus) - to_db(nominal.v_plus)));
    }
  }

  json doc = {
      {"config_hash", hash},
      {"seed", config.seed},
      {"tone_frequency_hz", tone_freq},
      {"band_hz", {band.lo_hz, band.hi_hz}},
      {"gain_db", summary.gain_db},
      {"predicted_gain_db", summary.predicted_gain_db},
      {"suppression_db", summary.suppression_db},
      {"suppression_is_lower_bound", summary.suppression_is_bound},
      {"predicted_suppression_db", std::isinf(summary.predicted_suppression_db)
                                       ? json("inf")
                                       : json(summary.predicted_suppression_db)},
      {"squeezed_suppression_db", summary.squeezed_suppression_db},
      {"squeezed_suppression_is_lower_bound", summary.squeezed_suppression_is_bound},
      {"shot_floor_db", summary.shot_floor_db},
      {"squeezed_floor_db", summary.squeezed_floor_db},
      {"squeezed_floor_quadrature_db", summary.squeezed_floor_quadrature_db},
      {"antisqueezed_floor_db", summary.antisqueezed_floor_db},
      {"predicted_squeezed_db", summary.predicted_squeezed_db},
      {"predicted_antisqueezed_db", summary.predicted_antisqueezed_db},
      {"pump_power_drift", config.pump_power_drift},
      {"squeezed_drift_span_db", summary.squeezed_drift_span_db},
      {"antisqueezed_drift_span_db", summary.antisqueezed_drift_span_db},
      {"runs", summary.runs},
  };
  write_json_file(out / "summary.json", doc);
  write_text_file(out / "summary.csv", csv);
  return summary;
}

Fig2Summary reproduce_fig2(const ExperimentConfig& config, const fs::path& out) {
  const std::string hash = config_hash(config);
  const DegradationParams truth = config.degradation();
  Fig2Summary summary;
  summary.truth_eta_c = truth.eta_c();
  summary.truth_xi_prime = truth.xi_prime();

  const auto& grid = config.sweep.x_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (Quadrature q : {Quadrature::squeezed, Quadrature::antisqueezed}) {
      for (int k = 0; k < config.sweep.replicates; ++k) {
        SimConfig sim = config.sim_config();
        sim.duration = config.sweep.duration;
        sim.tones.clear();
        sim.squeezing = true;
        sim.op_point = PumpOperatingPoint::from_x(grid[i]);
        const double theta_sq = q == Quadrature::squeezed ? 0.0 : kPi / 2;
        sim.phases = PhaseSettings(config.phases.theta_lo(), config.phases.phi(), theta_sq);
        sim.seed = derived_seed(config.seed, fmt::format("fig2/{}/{}/{}", i, static_cast<int>(q), k));
        const PowerSpectrum spec = channel_psd(synthesize(sim), Channel::inphase, config);
        const double level = band_mean(spec, config.analysis.band) /
                             band_mean(white_noise_reference(spec, 1.0), config.analysis.band);
        summary.dataset.points.push_back({grid[i], q, to_db(level), 1.0, 1});
      }
    }
  }
  summary.fit = fit_dephasing_model(summary.dataset, config.fit);
  summary.recovered = std::abs(summary.fit.eta_c - summary.truth_eta_c) <= config.tolerance.eta_c &&
                      std::abs(summary.fit.xi_prime - summary.truth_xi_prime) <= config.tolerance.xi_prime;

  write_dataset(out / "dataset.csv", summary.dataset, hash);
  json fit = fit_to_json(summary.fit);
  fit["config_hash"] = hash;
  write_json_file(out / "fit.json", fit);
  write_text_file(out / "model_curve.csv",
                  model_curve_csv(model_curve(summary.fit.eta_c, summary.fit.xi_prime, fine_grid()), hash));
  write_text_file(out / "truth_curve.csv",
                  model_curve_csv(model_curve(summary.truth_eta_c, summary.truth_xi_prime, fine_grid()), hash));
  write_json_file(out / "summary.json", {{"config_hash", hash},
                                         {"seed", config.seed},
                                         {"truth_eta_c", summary.truth_eta_c},
                                         {"truth_xi_prime", summary.truth_xi_prime},
                                         {"fit_eta_c", summary.fit.eta_c},
                                         {"fit_xi_prime", summary.fit.xi_prime},
                                         {"tolerance_eta_c", config.tolerance.eta_c},
                                         {"tolerance_xi_prime", config.tolerance.xi_prime},
                                         {"recovered", summary.recovered}});
  return summary;
}

}  // namespace twinhet
