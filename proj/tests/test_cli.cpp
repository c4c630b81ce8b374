#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kpss/config.hpp"
#include "kpss/errors.hpp"
#include "kpss/experiments.hpp"

namespace {

using namespace kpss;
namespace fs = std::filesystem;

std::string run_to_string(const std::string& experiment, const Config& config) {
  std::ostringstream out;
  run_experiment(experiment, config, out);
  return out.str();
}

std::string column_line(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') return line;
  }
  return {};
}

std::string error_of(const std::string& text) {
  try {
    Config config = Config::from_string(text, "test.ini");
    validate_experiment("contraction", config);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

struct CliRun {
  int status;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / ("kpss_cli_" + std::to_string(std::rand()) + ".txt");
  const std::string command = std::string(KPSS_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  std::ifstream in(out);
  std::stringstream buffer;
  buffer << in.rdbuf();
  fs::remove(out);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, buffer.str()};
}

std::string config_path(const std::string& name) { return std::string(KPSS_CONFIG_DIR) + "/" + name; }

TEST(Config, ParseErrorCarriesLine) {
  const std::string message = error_of("[target]\nfamily = dk\n[broken\n");
  EXPECT_NE(message.find("test.ini:3"), std::string::npos) << message;
}

TEST(Config, BadValueNamesLineAndField) {
  const std::string message =
      error_of("[target]\nfamily = dk\nd = 3\nk = abc\nphi = linear\n[contraction]\nradii = 1\nn = 10\n");
  EXPECT_NE(message.find("test.ini:4: target.k"), std::string::npos) << message;
}

TEST(Config, UnknownKeyAndSection) {
  EXPECT_NE(error_of("[target]\nfamily = dk\nd = 3\nk = 1\nphi = linear\nbogus = 1\n")
                .find("test.ini:6: target.bogus: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of("[target]\nfamily = dk\nd = 3\nk = 1\nphi = linear\n[levelset]\nn = 1\n")
                .find("unknown section [levelset]"),
            std::string::npos);
}

TEST(Config, KeyOutsideSection) {
  EXPECT_THROW(Config::from_string("seed = 1\n"), ConfigError);
}

TEST(Config, TypedGetters) {
  Config c = Config::from_string("[a]\nx = 2.5\nn = 7\nb = yes\nl = 1, 2 ,inf\n");
  EXPECT_EQ(c.get_double("a", "x"), 2.5);
  EXPECT_EQ(c.get_int("a", "n"), 7);
  EXPECT_THROW((void)c.get_int("a", "x"), ConfigError);
  EXPECT_TRUE(c.get_bool("a", "b", false));
  EXPECT_EQ(c.get_list("a", "l").size(), 3u);
  EXPECT_TRUE(std::isinf(c.get_list("a", "l")[2]));
  EXPECT_THROW((void)c.get_double("a", "missing"), ConfigError);
  EXPECT_EQ(c.get_double("a", "missing", 4.0), 4.0);
  c.set("a.x", "3");
  EXPECT_EQ(c.get_double("a", "x"), 3.0);
  EXPECT_THROW(c.set("nodot", "1"), ConfigError);
}

TEST(Config, HypothesesCheckedBeforeRunning) {
  Config c = Config::from_string("[gap_bound]\nkind = multiv_t\nd = 3\nk = 3\nm = 2\n");
  EXPECT_THROW(validate_experiment("gap-bound", c), ConfigError);
}

TEST(Experiments, GapBoundExample) {
  const Config c = Config::from_file(config_path("gap_bound.ini"));
  const std::string csv = run_to_string("gap-bound", c);
  EXPECT_NE(csv.find("rot_asym,64,64,2,0.030303030303030304"), std::string::npos) << csv;
}

TEST(Experiments, FixedColumns) {
  EXPECT_EQ(csv_columns("figure-appB-left"), "m,empirical_gap,theory_bound");
  EXPECT_EQ(csv_columns("figure-appB-right"), "d,m,empirical_gap,theory_bound");
  EXPECT_EQ(csv_columns("contraction"),
            "norm_x,norm_y,empirical_rate,std_error,theoretical_rate,bound_holds");
  for (const auto& name : experiment_names()) EXPECT_FALSE(csv_columns(name).empty());
  EXPECT_THROW(csv_columns("nope"), ConfigError);
}

TEST(Experiments, HeaderLayout) {
  const Config c = Config::from_file(config_path("gap_bound.ini"));
  const std::string csv = run_to_string("gap-bound", c);
  EXPECT_EQ(csv.rfind("# kpss gap-bound\n# seed = 0\n", 0), 0u) << csv;
  EXPECT_EQ(column_line(csv), "kind,d,k,m,value");
}

TEST(Experiments, ByteIdenticalAcrossRunsAndThreads) {
  Config c = Config::from_file(config_path("contraction.ini"));
  c.set("contraction.n", "2000");
  c.set("run.threads", "1");
  const std::string one = run_to_string("contraction", c);
  EXPECT_EQ(one, run_to_string("contraction", c));
  c.set("run.threads", "3");
  EXPECT_EQ(one, run_to_string("contraction", c));
  c.set("run.seed", "4");
  EXPECT_NE(one, run_to_string("contraction", c));
}

TEST(Experiments, FigureRowsByteIdenticalAcrossThreads) {
  Config c = Config::from_string(
      "[run]\nseed = 9\n[figure]\nd_log2 = 1, 2\nm_log2 = 0, 1\n[chain]\nlength = 2000\nburn_in = 10\n");
  c.set("run.threads", "1");
  const std::string one = run_to_string("figure-appB-right", c);
  c.set("run.threads", "4");
  EXPECT_EQ(one, run_to_string("figure-appB-right", c));
  EXPECT_EQ(column_line(one), "d,m,empirical_gap,theory_bound");
}

TEST(Cli, ExitCodes) {
  const CliRun ok = run_cli("gap-bound -c " + config_path("gap_bound.ini"));
  EXPECT_EQ(ok.status, 0) << ok.out;
  EXPECT_NE(ok.out.find("0.030303030303030304"), std::string::npos);

  const CliRun missing = run_cli("gap-bound -c /nonexistent.ini");
  EXPECT_EQ(missing.status, 1) << missing.out;

  const CliRun bad_override = run_cli("gap-bound -c " + config_path("gap_bound.ini") + " --set gap_bound.m=2 --set gap_bound.kind=multiv_t");
  EXPECT_EQ(bad_override.status, 1) << bad_override.out;

  const CliRun usage = run_cli("no-such-experiment -c " + config_path("gap_bound.ini"));
  EXPECT_NE(usage.status, 0);
}

TEST(Cli, SeedFlagAndOutputFile) {
  const fs::path out = fs::temp_directory_path() / "kpss_cli_out.csv";
  const CliRun r = run_cli("contraction -c " + config_path("contraction.ini") +
                        " --set contraction.n=500 -s 77 -t 2 -o " + out.string());
  ASSERT_EQ(r.status, 0) << r.out;
  std::ifstream in(out);
  std::stringstream buffer;
  buffer << in.rdbuf();
  fs::remove(out);
  const std::string csv = buffer.str();
  EXPECT_NE(csv.find("# seed = 77\n"), std::string::npos);
  EXPECT_EQ(csv.find("threads"), std::string::npos);
  EXPECT_EQ(column_line(csv), csv_columns("contraction"));
}

}  // namespace
