#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "twinhet/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "twinhet_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(TWINHET_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write(const std::string& name, const std::string& content) {
  fs::create_directories(kDir);
  twinhet::write_text_file(kDir / name, content);
  return kDir / name;
}

}  // namespace

TEST(Cli, SuccessfulVerbs) {
  EXPECT_EQ(run("budget"), 0);
  EXPECT_EQ(run("defaults"), 0);
  EXPECT_EQ(run("model-curve --x 0,0.65"), 0);
  const fs::path cfg = write("short.json", R"({"simulation": {"duration_s": 0.2}})");
  const fs::path out = kDir / "sim";
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " --jobs 2 simulate"), 0);
  EXPECT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " --band 15000:40000 spectrum " +
                (out / "timeseries.bin").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "timeseries_inphase.csv"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("no-such-verb"), 1);
  EXPECT_EQ(run(""), 1);
  const fs::path bad = write("bad.json", R"({"simulation": {"bogus": 1}})");
  EXPECT_EQ(run("--config " + bad.string() + " budget"), 2);
  EXPECT_EQ(run("--band 5:1 budget"), 2);
  EXPECT_EQ(run("model-curve --x 0.5,1.0"), 3);
  const fs::path empty = write("empty.csv", "");
  EXPECT_EQ(run("--out " + (kDir / "o").string() + " spectrum " + empty.string()), 4);
  EXPECT_EQ(run("--out " + (kDir / "o").string() + " fit " + empty.string()), 4);
}

TEST(Cli, ModelCurveIsByteIdenticalAcrossRuns) {
  const fs::path a = kDir / "mc_a", b = kDir / "mc_b";
  ASSERT_EQ(run("--out " + a.string() + " model-curve"), 0);
  ASSERT_EQ(run("--out " + b.string() + " model-curve"), 0);
  EXPECT_EQ(twinhet::read_text_file(a / "model_curve.csv"), twinhet::read_text_file(b / "model_curve.csv"));
}
