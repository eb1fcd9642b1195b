#include <filesystem>

#include <gtest/gtest.h>

#include "twinhet/errors.hpp"
#include "twinhet/pipelines.hpp"

using namespace twinhet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "twinhet_pipelines" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Budget, ReferencePaths) {
  const auto lines = budget_report(default_config());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_NEAR(lines[0].predicted.value, 0.7563672, 1e-12);
  EXPECT_NEAR(lines[0].predicted.uncertainty, 0.0269, 1e-4);
  EXPECT_FALSE(lines[0].disagrees);  // 0.756 vs 0.77 +- 0.03
  EXPECT_NEAR(lines[2].predicted.value, 0.65573042621184, 1e-12);
  EXPECT_FALSE(lines[2].disagrees);
  // 0.756 +- 0.027 against 0.80 +- 0.03 is outside the combined one sigma.
  EXPECT_TRUE(lines[1].disagrees);
  EXPECT_NE(format_budget_report(lines).find("signal_lower"), std::string::npos);
}

TEST(Budget, EmptyBudgetIsAnError) {
  ExperimentConfig c = default_config();
  c.budget = LossBudget();
  EXPECT_THROW(budget_report(c), ConfigError);
  c = default_config();
  c.paths.clear();
  EXPECT_THROW(budget_report(c), ConfigError);
}

TEST(ModelCurve, ReferencePointsAndMonotonicity) {
  const auto pt = model_curve(0.64, 3.7e-4, {0.65});
  EXPECT_NEAR(pt[0].squeezed_db, -4.0445, 1e-4);
  EXPECT_NEAR(pt[0].antisqueezed_db, 11.6371, 1e-4);
  const auto zero = model_curve(1.0, 0.0, {0.0});
  EXPECT_EQ(zero[0].squeezed_db, 0.0);
  EXPECT_EQ(zero[0].antisqueezed_db, 0.0);
  std::vector<double> grid;
  for (int i = 0; i <= 90; ++i) grid.push_back(i / 100.0);
  const auto curve = model_curve(0.73, 5e-5, grid);
  // Squeezing deepens until antisqueezing leaks in; the optimum sits near x = 0.845.
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (grid[i] <= 0.84) {
      EXPECT_LT(curve[i].squeezed_db, curve[i - 1].squeezed_db);
    } else if (grid[i] >= 0.85) {
      EXPECT_GT(curve[i].squeezed_db, curve[i - 1].squeezed_db);
    }
    EXPECT_GT(curve[i].antisqueezed_db, curve[i - 1].antisqueezed_db);
  }
  EXPECT_NEAR(model_curve(0.73, 5e-5, {0.845})[0].squeezed_db, -5.52340, 1e-5);
  EXPECT_THROW(model_curve(0.64, 3.7e-4, {0.5, 1.0}), NumericError);
  const std::string csv = model_curve_csv(pt, "h");
  EXPECT_EQ(csv.rfind("# config_hash=h\nx,squeezed_db,antisqueezed_db\n0.65,", 0), 0u);
}

TEST(Pipelines, SimulateThenSpectrum) {
  ExperimentConfig c = default_config();
  c.duration = 0.5;
  const fs::path out = scratch_dir("sim");
  const fs::path ts = run_simulate(c, out);
  EXPECT_TRUE(fs::exists(ts));
  EXPECT_TRUE(fs::exists(ts.string() + ".json"));
  const auto specs = run_spectrum(c, {ts}, std::nullopt, Channel::inphase, out);
  ASSERT_EQ(specs.size(), 1u);
  EXPECT_NEAR(specs[0].band_average_db, -4.0445, 0.3);
  ASSERT_EQ(specs[0].tone_snr_db.size(), 2u);
  EXPECT_GT(specs[0].tone_snr_db[0], 20.0);

  const fs::path empty = out / "empty.bin";
  write_text_file(empty, "");
  try {
    run_spectrum(c, {empty}, std::nullopt, Channel::inphase, out);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("empty.bin"), std::string::npos);
  }
}

TEST(Pipelines, FitFromDatasetFile) {
  const ExperimentConfig c = default_config();
  const fs::path out = scratch_dir("fit");
  const auto data = model_dataset(0.64, 3.7e-4, c.sweep.x_grid, 3, 0.2, RngStream(3, "p"));
  write_dataset(out / "data.csv", data, "h");
  const FitResult r = run_fit(c, out / "data.csv", out);
  EXPECT_NEAR(r.eta_c, 0.64, 0.02);
  const auto doc = nlohmann::json::parse(read_text_file(out / "fit.json"));
  EXPECT_TRUE(doc.contains("efficiencies"));
  EXPECT_EQ(doc["config_hash"], config_hash(c));
}

TEST(Pipelines, Fig3AgainstAnalyticPredictions) {
  const ExperimentConfig c = default_config();
  const Fig3Summary s = reproduce_fig3(c, scratch_dir("fig3"));
  EXPECT_NEAR(s.gain_db, 6.02, 0.3);
  EXPECT_GE(s.suppression_db, 30.0);
  EXPECT_NEAR(s.shot_floor_db, 0.0, 0.05);
  EXPECT_NEAR(s.squeezed_floor_db, s.predicted_squeezed_db, 0.2);
  EXPECT_NEAR(s.antisqueezed_floor_db, s.predicted_antisqueezed_db, 0.2);
  EXPECT_NEAR(s.squeezed_floor_quadrature_db, s.predicted_squeezed_db, 0.2);
  EXPECT_EQ(fig3_runs().size(), 7u);
  // 5% pump-power drift moves x by sqrt(1 +- 0.05).
  EXPECT_NEAR(s.squeezed_drift_span_db, 0.0313267777857349, 1e-9);
  EXPECT_NEAR(s.antisqueezed_drift_span_db, 0.480370332702207, 1e-9);
}

TEST(Pipelines, Fig2RecoversConfiguredTruth) {
  ExperimentConfig c = default_config();
  c.sweep.duration = 0.5;
  const Fig2Summary s = reproduce_fig2(c, scratch_dir("fig2"));
  EXPECT_EQ(s.dataset.points.size(), 48u);
  EXPECT_TRUE(s.recovered);
}

TEST(Pipelines, DerivedSeedsDiffer) {
  EXPECT_NE(derived_seed(1, "a"), derived_seed(1, "b"));
  EXPECT_NE(derived_seed(1, "a"), derived_seed(2, "a"));
  EXPECT_EQ(derived_seed(5, "x"), derived_seed(5, "x"));
}
