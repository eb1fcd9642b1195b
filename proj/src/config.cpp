#include "twinhet/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "twinhet/errors.hpp"
#include "twinhet/io.hpp"

namespace twinhet {

using nlohmann::json;

namespace {

/// Reads one JSON object, remembering which keys were consumed so leftovers
/// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string pointer, const std::string& origin)
      : node_(node), pointer_(std::move(pointer)), origin_(origin) {
    if (!node_.is_object()) fail(pointer_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string where(const std::string& key) const { return pointer_ + "/" + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number()) fail(where(key), "expected a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(where(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) fail(where(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail(where(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_string()) fail(where(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_array()) fail(where(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(fmt::format("{}/{}", where(key), i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(where(key), "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw ConfigError(fmt::format("{}: {}: {}", origin_, pointer.empty() ? "/" : pointer, message));
  }

 private:
  const json& node_;
  std::string pointer_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

/// Runs `check`, rethrowing model errors as ConfigError at `pointer`.
template <typename F>
void check_at(const std::string& origin, const std::string& pointer, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    // Errors from nested readers already carry their location.
    if (std::string_view(e.what()).starts_with(origin + ": /")) throw;
    throw ConfigError(fmt::format("{}: {}: {}", origin, pointer, e.what()));
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}: {}", origin, pointer, e.what()));
  }
}

Efficiency read_efficiency(const json& node, const std::string& pointer, const std::string& origin) {
  ObjectReader r(node, pointer, origin);
  Efficiency e;
  e.value = r.number("value", 1.0);
  e.uncertainty = r.number("uncertainty", 0.0);
  r.finish();
  if (!(e.value >= 0.0 && e.value <= 1.0)) r.fail(pointer + "/value", "efficiency outside [0, 1]");
  if (!(e.uncertainty >= 0.0)) r.fail(pointer + "/uncertainty", "uncertainty must be >= 0");
  return e;
}

Tone read_tone(const json& node, const std::string& pointer, const std::string& origin) {
  ObjectReader r(node, pointer, origin);
  Tone t;
  const std::string target = r.string("target", "lower");
  if (target == "lower") {
    t.target = ToneTarget::lower;
  } else if (target == "upper") {
    t.target = ToneTarget::upper;
  } else {
    r.fail(r.where("target"), "expected \"lower\" or \"upper\"");
  }
  t.frequency = r.number("frequency_hz", 25e3);
  t.amplitude = r.number("amplitude", 0.0);
  const std::string quad = r.string("quadrature", "amplitude");
  if (quad == "amplitude") {
    t.quadrature = ToneQuadrature::amplitude;
  } else if (quad == "phase") {
    t.quadrature = ToneQuadrature::phase;
  } else {
    r.fail(r.where("quadrature"), "expected \"amplitude\" or \"phase\"");
  }
  t.phase = r.number("phase", 0.0);
  r.finish();
  if (!(t.amplitude >= 0.0)) r.fail(r.where("amplitude"), "amplitude must be >= 0");
  return t;
}

const BudgetPath* find_path(const std::vector<BudgetPath>& paths, const std::string& name) {
  for (const auto& p : paths)
    if (p.name == name) return &p;
  return nullptr;
}

json efficiency_json(const Efficiency& e) {
  return {{"value", e.value}, {"uncertainty", e.uncertainty}};
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.paths = {
      {"signal_lower", reference_signal_path(), Efficiency{0.77, 0.03}},
      {"signal_upper", reference_signal_path(), Efficiency{0.80, 0.03}},
      {"squeezing_lower", reference_squeezing_path(), Efficiency{0.64, 0.03}},
      {"squeezing_upper", reference_squeezing_path(), Efficiency{0.69, 0.03}},
  };
  const EfficiencyPair pair = invert_dephasing(0.64, 3.7e-4, 8e-3);
  cfg.eta1 = pair.eta1;
  cfg.eta2 = pair.eta2;
  cfg.theta_rms = 8e-3;
  cfg.pump = PumpOperatingPoint::from_x(0.65);
  cfg.tones = {{ToneTarget::lower, 25e3, 2.0, ToneQuadrature::amplitude, 0.0},
               {ToneTarget::upper, 25e3, 2.0, ToneQuadrature::amplitude, 0.0}};
  return cfg;
}

DegradationParams ExperimentConfig::degradation() const {
  return DegradationParams::from_efficiencies(eta1, eta2, theta_rms);
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig sim;
  sim.sample_rate = sample_rate;
  sim.duration = duration;
  sim.seed = seed;
  sim.squeezing = squeezing;
  sim.op_point = pump;
  sim.phases = phases;
  sim.eta1 = eta1;
  sim.eta2 = eta2;
  sim.theta_rms = theta_rms;
  sim.jitter_block_seconds = jitter_block_seconds;
  sim.tones = tones;
  sim.carrier = carrier;
  sim.dark_noise_variance = dark_noise_variance;
  sim.acoustic_level = acoustic_level;
  sim.acoustic_corner_hz = acoustic_corner_hz;
  return sim;
}

std::vector<Notch> ExperimentConfig::tone_notches() const {
  std::vector<Notch> notches;
  for (const Tone& t : tones) notches.push_back({t.frequency, analysis.notch_half_width_hz});
  return notches;
}

ExperimentConfig parse_config(const json& doc, const std::string& origin) {
  ExperimentConfig cfg = default_config();
  ObjectReader root(doc, "", origin);

  if (root.has("carrier")) {
    ObjectReader r(root.at("carrier"), "/carrier", origin);
    cfg.carrier.omega0 = r.number("omega0_rad_s", cfg.carrier.omega0);
    cfg.carrier.delta = r.number("delta_hz", cfg.carrier.delta);
    cfg.carrier.signal_freq = r.number("signal_freq_hz", cfg.carrier.signal_freq);
    r.finish();
    check_at(origin, "/carrier", [&] { cfg.carrier.validate(); });
  }

  if (root.has("budget")) {
    ObjectReader r(root.at("budget"), "/budget", origin);
    if (r.has("components")) {
      const json& comps = r.at("components");
      if (!comps.is_object()) r.fail("/budget/components", "expected an object");
      std::map<std::string, Efficiency> parsed;
      for (const auto& [name, value] : comps.items()) {
        parsed[name] = read_efficiency(value, "/budget/components/" + name, origin);
      }
      cfg.budget = LossBudget(std::move(parsed));
    }
    if (r.has("paths")) {
      const json& paths = r.at("paths");
      if (!paths.is_array()) r.fail("/budget/paths", "expected an array");
      cfg.paths.clear();
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const std::string ptr = fmt::format("/budget/paths/{}", i);
        ObjectReader pr(paths[i], ptr, origin);
        BudgetPath path;
        path.name = pr.string("name", fmt::format("path{}", i));
        if (!pr.has("components")) pr.fail(ptr, "missing \"components\"");
        const json& comps = pr.at("components");
        if (!comps.is_array()) pr.fail(ptr + "/components", "expected an array of names");
        for (std::size_t j = 0; j < comps.size(); ++j) {
          if (!comps[j].is_string()) {
            pr.fail(fmt::format("{}/components/{}", ptr, j), "expected a component name");
          }
          const auto name = comps[j].get<std::string>();
          if (!cfg.budget.components().count(name)) {
            pr.fail(fmt::format("{}/components/{}", ptr, j),
                    fmt::format("unknown budget component '{}'", name));
          }
          path.components.push_back(name);
        }
        if (pr.has("measured")) path.measured = read_efficiency(pr.at("measured"), ptr + "/measured", origin);
        pr.finish();
        cfg.paths.push_back(std::move(path));
      }
    }
    r.finish();
  }

  if (root.has("degradation")) {
    ObjectReader r(root.at("degradation"), "/degradation", origin);
    const double theta = r.number("theta_rms", 0.0);
    const bool by_eta = r.has("eta1") || r.has("eta2");
    const bool by_common = r.has("eta_c") || r.has("xi_prime");
    const bool by_path = r.has("eta1_path") || r.has("eta2_path");
    if (int(by_eta) + int(by_common) + int(by_path) != 1) {
      r.fail("/degradation",
             "give exactly one of {eta1, eta2}, {eta_c, xi_prime} or {eta1_path, eta2_path}");
    }
    check_at(origin, "/degradation", [&] {
      if (by_eta) {
        cfg.eta1 = r.number("eta1", 1.0);
        cfg.eta2 = r.number("eta2", 1.0);
      } else if (by_common) {
        const EfficiencyPair pair =
            invert_dephasing(r.number("eta_c", 1.0), r.number("xi_prime", theta * theta), theta);
        cfg.eta1 = pair.eta1;
        cfg.eta2 = pair.eta2;
      } else {
        for (const char* key : {"eta1_path", "eta2_path"}) {
          const std::string name = r.string(key, "");
          const BudgetPath* p = find_path(cfg.paths, name);
          if (p == nullptr) r.fail(r.where(key), fmt::format("no budget path named '{}'", name));
          (std::string(key) == "eta1_path" ? cfg.eta1 : cfg.eta2) =
              path_efficiency(cfg.budget, p->components).value;
        }
      }
      cfg.theta_rms = theta;
      (void)cfg.degradation();
    });
    r.finish();
  }

  if (root.has("pump")) {
    ObjectReader r(root.at("pump"), "/pump", origin);
    const bool has_x = r.has("x");
    const bool has_r = r.has("r");
    const bool has_p = r.has("pump_power_mw") || r.has("threshold_power_mw");
    if (r.has("power_drift")) {
      cfg.pump_power_drift = r.number("power_drift", 0.05);
      if (!(cfg.pump_power_drift >= 0.0 && cfg.pump_power_drift < 1.0)) {
        r.fail("/pump/power_drift", "must lie in [0, 1)");
      }
    }
    if (int(has_x) + int(has_r) + int(has_p) != 1) {
      r.fail("/pump", "give exactly one of x, r or {pump_power_mw, threshold_power_mw}");
    }
    check_at(origin, "/pump", [&] {
      if (has_x) cfg.pump = PumpOperatingPoint::from_x(r.number("x", 0.0));
      if (has_r) cfg.pump = PumpOperatingPoint::from_r(r.number("r", 0.0));
      if (has_p) {
        cfg.pump = PumpOperatingPoint::from_powers(r.number("pump_power_mw", 0.0),
                                                   r.number("threshold_power_mw", 66.3));
      }
    });
    r.finish();
  }

  if (root.has("phases")) {
    ObjectReader r(root.at("phases"), "/phases", origin);
    cfg.phases = PhaseSettings(r.number("theta_lo", 0.0), r.number("phi", 0.0),
                               r.number("theta_sq", 0.0));
    r.finish();
  }

  if (root.has("tones")) {
    const json& tones = root.at("tones");
    if (!tones.is_array()) root.fail("/tones", "expected an array");
    cfg.tones.clear();
    for (std::size_t i = 0; i < tones.size(); ++i) {
      cfg.tones.push_back(read_tone(tones[i], fmt::format("/tones/{}", i), origin));
    }
  }

  if (root.has("simulation")) {
    ObjectReader r(root.at("simulation"), "/simulation", origin);
    cfg.sample_rate = r.number("sample_rate_hz", cfg.sample_rate);
    cfg.duration = r.number("duration_s", cfg.duration);
    cfg.seed = r.unsigned_int("seed", cfg.seed);
    cfg.squeezing = r.boolean("squeezing", cfg.squeezing);
    cfg.jitter_block_seconds = r.number("jitter_block_s", cfg.jitter_block_seconds);
    cfg.dark_noise_variance = r.number("dark_noise_variance", cfg.dark_noise_variance);
    cfg.acoustic_level = r.number("acoustic_level", cfg.acoustic_level);
    cfg.acoustic_corner_hz = r.number("acoustic_corner_hz", cfg.acoustic_corner_hz);
    r.finish();
  }

  if (root.has("analysis")) {
    ObjectReader r(root.at("analysis"), "/analysis", origin);
    const auto band = r.numbers("band_hz", {cfg.analysis.band.lo_hz, cfg.analysis.band.hi_hz});
    if (band.size() != 2 || !(band[1] > band[0]) || band[0] < 0.0) {
      r.fail("/analysis/band_hz", "expected [lo, hi] with 0 <= lo < hi");
    }
    cfg.analysis.band = {band[0], band[1]};
    const int seg = r.integer("segment_len", static_cast<int>(cfg.analysis.welch.segment_len));
    if (seg < 8) r.fail("/analysis/segment_len", "must be >= 8");
    cfg.analysis.welch.segment_len = static_cast<std::size_t>(seg);
    cfg.analysis.welch.overlap = r.number("overlap", cfg.analysis.welch.overlap);
    if (!(cfg.analysis.welch.overlap >= 0.0 && cfg.analysis.welch.overlap < 1.0)) {
      r.fail("/analysis/overlap", "must lie in [0, 1)");
    }
    check_at(origin, "/analysis/window", [&] {
      cfg.analysis.welch.window = window_from_name(r.string("window", "hann"));
    });
    cfg.analysis.notch_half_width_hz =
        r.number("notch_half_width_hz", cfg.analysis.notch_half_width_hz);
    r.finish();
  }

  if (root.has("sweep")) {
    ObjectReader r(root.at("sweep"), "/sweep", origin);
    cfg.sweep.x_grid = r.numbers("x_grid", cfg.sweep.x_grid);
    for (std::size_t i = 0; i < cfg.sweep.x_grid.size(); ++i) {
      const double x = cfg.sweep.x_grid[i];
      if (!(x >= 0.0 && x < 1.0)) r.fail(fmt::format("/sweep/x_grid/{}", i), "x outside [0, 1)");
    }
    cfg.sweep.replicates = r.integer("replicates", cfg.sweep.replicates);
    if (cfg.sweep.replicates < 1) r.fail("/sweep/replicates", "must be >= 1");
    cfg.sweep.duration = r.number("duration_s", cfg.sweep.duration);
    r.finish();
  }

  if (root.has("fit")) {
    ObjectReader r(root.at("fit"), "/fit", origin);
    const auto init = r.numbers("init", {cfg.fit.init[0], cfg.fit.init[1]});
    if (init.size() != 2) r.fail("/fit/init", "expected [eta_c, xi_prime]");
    cfg.fit.init = {init[0], init[1]};
    cfg.fit.xi_seeds = r.integer("xi_seeds", cfg.fit.xi_seeds);
    cfg.fit.max_iterations = r.integer("max_iterations", cfg.fit.max_iterations);
    cfg.fit.profile_bounds = r.boolean("profile_bounds", cfg.fit.profile_bounds);
    cfg.fit.bootstrap_replicas = r.integer("bootstrap_replicas", cfg.fit.bootstrap_replicas);
    cfg.tolerance.eta_c = r.number("tolerance_eta_c", cfg.tolerance.eta_c);
    cfg.tolerance.xi_prime = r.number("tolerance_xi_prime", cfg.tolerance.xi_prime);
    r.finish();
    if (cfg.fit.max_iterations < 1) r.fail("/fit/max_iterations", "must be >= 1");
  }

  if (root.has("output")) {
    ObjectReader r(root.at("output"), "/output", origin);
    cfg.out_dir = r.string("dir", cfg.out_dir);
    r.finish();
  }
  root.finish();

  check_at(origin, "/simulation", [&] { cfg.sim_config().validate(); });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  return parse_config(doc, path.string());
}

json to_json(const ExperimentConfig& c) {
  json comps = json::object();
  for (const auto& [name, e] : c.budget.components()) comps[name] = efficiency_json(e);
  json paths = json::array();
  for (const auto& p : c.paths) {
    json jp = {{"name", p.name}, {"components", p.components}};
    if (p.measured) jp["measured"] = efficiency_json(*p.measured);
    paths.push_back(jp);
  }
  json tones = json::array();
  for (const auto& t : c.tones) {
    tones.push_back({{"target", t.target == ToneTarget::lower ? "lower" : "upper"},
                     {"frequency_hz", t.frequency},
                     {"amplitude", t.amplitude},
                     {"quadrature", t.quadrature == ToneQuadrature::amplitude ? "amplitude" : "phase"},
                     {"phase", t.phase}});
  }
  return {
      {"carrier",
       {{"omega0_rad_s", c.carrier.omega0},
        {"delta_hz", c.carrier.delta},
        {"signal_freq_hz", c.carrier.signal_freq}}},
      {"budget", {{"components", comps}, {"paths", paths}}},
      {"degradation", {{"eta1", c.eta1}, {"eta2", c.eta2}, {"theta_rms", c.theta_rms}}},
      {"pump", {{"x", c.pump.x}, {"power_drift", c.pump_power_drift}}},
      {"phases",
       {{"theta_lo", c.phases.theta_lo()}, {"phi", c.phases.phi()}, {"theta_sq", c.phases.theta_sq()}}},
      {"tones", tones},
      {"simulation",
       {{"sample_rate_hz", c.sample_rate},
        {"duration_s", c.duration},
        {"seed", c.seed},
        {"squeezing", c.squeezing},
        {"jitter_block_s", c.jitter_block_seconds},
        {"dark_noise_variance", c.dark_noise_variance},
        {"acoustic_level", c.acoustic_level},
        {"acoustic_corner_hz", c.acoustic_corner_hz}}},
      {"analysis",
       {{"band_hz", {c.analysis.band.lo_hz, c.analysis.band.hi_hz}},
        {"segment_len", c.analysis.welch.segment_len},
        {"overlap", c.analysis.welch.overlap},
        {"window", window_name(c.analysis.welch.window)},
        {"notch_half_width_hz", c.analysis.notch_half_width_hz}}},
      {"sweep",
       {{"x_grid", c.sweep.x_grid},
        {"replicates", c.sweep.replicates},
        {"duration_s", c.sweep.duration}}},
      {"fit",
       {{"init", {c.fit.init[0], c.fit.init[1]}},
        {"xi_seeds", c.fit.xi_seeds},
        {"max_iterations", c.fit.max_iterations},
        {"profile_bounds", c.fit.profile_bounds},
        {"bootstrap_replicas", c.fit.bootstrap_replicas},
        {"tolerance_eta_c", c.tolerance.eta_c},
        {"tolerance_xi_prime", c.tolerance.xi_prime}}},
      {"output", {{"dir", c.out_dir}}},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  json resolved = to_json(config);
  // Where outputs go does not change what they contain.
  resolved.erase("output");
  return sha256_hex(resolved.dump());
}

}  // namespace twinhet
