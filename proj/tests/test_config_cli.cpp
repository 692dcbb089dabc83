#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/commands.hpp"
#include "qcat/config.hpp"
#include "qcat/text.hpp"

using namespace qcat;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(QCAT_SOURCE_DIR) / "configs";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error_field(const std::string& text) {
  try {
    parse(text).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cheshire");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path p = fs::temp_directory_path() / ("qcat_test_" + name);
  std::ofstream(p) << contents;
  return p;
}

}  // namespace

TEST(Text, ComplexParsing) {
  EXPECT_EQ(text::parse_complex("0.5+0.5i"), Complex(0.5, 0.5));
  EXPECT_EQ(text::parse_complex(" -1 "), Complex(-1.0, 0.0));
  EXPECT_EQ(text::parse_complex("-2i"), Complex(0.0, -2.0));
  EXPECT_EQ(text::parse_complex("1e-3-4.5i"), Complex(1e-3, -4.5));
  EXPECT_THROW(text::parse_complex("1+i+2"), ValidationError);
  const Complex z(0.1, -1.0 / 3.0);
  EXPECT_EQ(text::parse_complex(text::format_complex(z)), z);
}

TEST(Config, ParsesAndNormalizes) {
  const auto c = load_config(kConfigs / "example_states.cfg");
  EXPECT_NEAR(std::abs(c.prep[0] - 1.0 / std::sqrt(3.0)), 0.0, 1e-15);
  EXPECT_EQ(c.g_a, 2.0);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.grid.points, 4001u);
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(load_config(kConfigs / "mixed_effect.cfg").effect.has_value());
}

TEST(Config, DumpRoundTrip) {
  for (const char* name : {"example_states.cfg", "optimal.cfg", "unit_weak_values.cfg", "mixed_effect.cfg"}) {
    const auto c = load_config(kConfigs / name);
    EXPECT_EQ(parse(dump_config(c)), c) << name;
  }
  auto c = load_config(kConfigs / "example_states.cfg");
  c.prep = {Complex(0.6, 0.1), 0.0, Complex(0.0, -0.5), std::sqrt(1.0 - 0.37 - 0.25)};
  c.noise_a = 1.0 / 7.0;
  c.seed = 18446744073709551615ull;
  EXPECT_EQ(parse(dump_config(c)), c);
}

TEST(Config, ErrorsNameTheField) {
  const std::string base = "prep = 1, 0, 0, 0\npost = 1, 0, 0, 0\n";
  EXPECT_EQ(config_error_field("prep = 1, 0, 1, 0\npost = 1, 0, 0, 0\n"), "prep");
  EXPECT_EQ(config_error_field("prep = 1, 0, 0, 0\npost = 0, 0, 0, 2\n"), "post");
  EXPECT_EQ(config_error_field(base + "g_a = -1\n"), "g_a");
  EXPECT_EQ(config_error_field(base + "g_b = nan\n"), "g_b");
  EXPECT_EQ(config_error_field(base + "noise_b = -0.1\n"), "noise_b");
  EXPECT_EQ(config_error_field(base + "g_a = 15\n"), "grid_max");
  EXPECT_EQ(config_error_field(base + "grid_points = 2\n"), "grid_points");
  EXPECT_EQ(config_error_field("prep = 1, 0, 0, 0\n"), "post");
  EXPECT_EQ(config_error_field("prep = 1, 0, 0, 0\neffect = 2,0,0,0, 0,0,0,0, 0,0,0,0, 0,0,0,0\n"), "effect");
  EXPECT_THROW(parse(base + "colour = red\n"), ConfigError);
  EXPECT_THROW(parse(base + "g_a = 1\ng_a = 2\n"), ConfigError);
  EXPECT_THROW(parse("prep = 1, 0, 0\n"), ConfigError);
  EXPECT_THROW(parse(base + "seed = -3\n"), ConfigError);
}

TEST(Cli, AnalyticOutput) {
  const auto r = run_cli({"--config", (kConfigs / "optimal.cfg").string(), "analytic"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto kv = key_values(r.out);
  EXPECT_NEAR(text::parse_double(kv.at("c_analytic")), std::exp(-1.0), 1e-15);
  EXPECT_EQ(kv.at("c_analytic").substr(0, 8), "0.367879");
  for (const char* key : {"p_success", "trace_term", "weak_value_L", "weak_value_sigma", "mean_x", "mean_y",
                          "negativity", "c_bound"}) {
    EXPECT_TRUE(kv.count(key)) << key;
  }

  const auto e = run_cli({"--config", (kConfigs / "example_states.cfg").string(), "analytic"});
  EXPECT_EQ(key_values(e.out).at("c_analytic").substr(0, 8), "0.327003");

  const auto w = run_cli({"--config", (kConfigs / "unit_weak_values.cfg").string(), "analytic"});
  kv = key_values(w.out);
  EXPECT_NEAR(text::parse_complex(kv.at("weak_value_L")).real(), 1.0, 1e-14);
  EXPECT_NEAR(text::parse_complex(kv.at("weak_value_sigma")).real(), 1.0, 1e-14);

  const auto zero = temp_file("zero.cfg", "prep = 1, 0, 1, 0\npost = 1, 0, 1, 0\nnormalize = true\ng_a = 0\n");
  EXPECT_EQ(key_values(run_cli({"--config", zero.string(), "analytic"}).out).at("c_analytic"), "0");

  const auto mixed = run_cli({"--config", (kConfigs / "mixed_effect.cfg").string(), "analytic"});
  ASSERT_EQ(mixed.code, 0) << mixed.err;
  EXPECT_NEAR(text::parse_double(key_values(mixed.out).at("c_analytic")), 0.5 * std::exp(-1.0), 1e-15);
}

TEST(Cli, SweepLocatesOptimum) {
  auto config = load_config(kConfigs / "example_states.cfg");
  const auto rows = cli::sweep_rows(config, {}, 2);
  ASSERT_EQ(rows.size(), 161u);
  const auto& best = rows[cli::sweep_maximum(rows)];
  EXPECT_NEAR(best.g_a, 2.0, 0.025);
  for (const auto& r : rows) EXPECT_NEAR(r.c_analytic, r.c_grid, 1e-8) << r.g_a;
  EXPECT_EQ(rows[0].c_analytic, 0.0);
  EXPECT_NEAR(rows[0].p_success, 1.0 / 9.0, 1e-15);

  const auto out = temp_file("sweep.csv", "");
  const auto r = run_cli({"--config", (kConfigs / "example_states.cfg").string(), "--out", out.string(), "sweep",
                      "--steps", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(out);
  std::string header, line, last;
  std::getline(in, header);
  EXPECT_EQ(header, "g_a,g_b,c_analytic,c_grid,p_success,negativity");
  int data = 0;
  while (std::getline(in, line)) {
    if (line[0] == '#') last = line;
    else ++data;
  }
  EXPECT_EQ(data, 11);
  EXPECT_EQ(last.rfind("# maximum |c_analytic|: g_a=", 0), 0u);
}

TEST(Cli, MonteCarloIsDeterministic) {
  const std::vector<std::string> args{"--config", (kConfigs / "example_states.cfg").string(), "--trials", "50000",
                                      "montecarlo"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto kv = key_values(a.out);
  EXPECT_EQ(kv.at("n_trials"), "50000");
  EXPECT_LT(std::abs(text::parse_double(kv.at("z_score"))), 4.0);
  auto seeded = args;
  seeded.insert(seeded.begin(), {"--seed", "7"});
  EXPECT_NE(run_cli(seeded).out, a.out);

  const auto csv = fs::temp_directory_path() / "qcat_test_trials.csv";
  const auto c = run_cli({"--config", (kConfigs / "example_states.cfg").string(), "--trials", "1000", "montecarlo",
                      "--trials-csv", csv.string()});
  ASSERT_EQ(c.code, 0) << c.err;
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "tau,x,y");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 1000);

  const auto scan = run_cli({"--config", (kConfigs / "example_states.cfg").string(), "--trials", "20000", "montecarlo",
                         "--noise-scan", "0,5"});
  ASSERT_EQ(scan.code, 0) << scan.err;
  EXPECT_EQ(scan.out.substr(0, scan.out.find('\n')), "nu_a,nu_b,c_hat,std_error,n_required");
}

TEST(Cli, OptimizeCommand) {
  const auto best = fs::temp_directory_path() / "qcat_test_best.cfg";
  const auto r = run_cli({"--config", (kConfigs / "example_states.cfg").string(), "optimize", "--write-config",
                      best.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = key_values(r.out);
  EXPECT_NEAR(text::parse_double(kv.at("g_a_opt")), 2.0, 1e-6);
  EXPECT_NEAR(text::parse_double(kv.at("c_states")), std::exp(-1.0), 1e-6);
  const auto again = run_cli({"--config", best.string(), "analytic"});
  EXPECT_NEAR(text::parse_double(key_values(again.out).at("c_analytic")), std::exp(-1.0), 1e-6);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({"--config", "/nonexistent/x.cfg", "analytic"}).code, 2);
  EXPECT_EQ(run_cli({"analytic"}).code, 2);
  const auto bad = temp_file("bad.cfg", "prep = 1, 0, 0, 0\npost = 1, 0, 0, 0\ng_b = -2\n");
  const auto r = run_cli({"--config", bad.string(), "analytic"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("g_b"), std::string::npos);
  EXPECT_EQ(run_cli({"--config", (kConfigs / "example_states.cfg").string(), "--grid-points", "3", "sweep"}).code, 2);
  EXPECT_EQ(run_cli({"--config", (kConfigs / "example_states.cfg").string(), "sweep", "--g-max", "30"}).code, 2);
  EXPECT_EQ(run_cli({"--config", (kConfigs / "example_states.cfg").string(), "--trials", "10", "montecarlo"}).code, 2);
  EXPECT_EQ(run_cli({"--config", (kConfigs / "mixed_effect.cfg").string(), "montecarlo"}).code, 2);

  const auto dump = run_cli({"--config", (kConfigs / "example_states.cfg").string(), "--seed", "9", "--dump-config",
                         "analytic"});
  ASSERT_EQ(dump.code, 0);
  auto expected = load_config(kConfigs / "example_states.cfg");
  expected.seed = 9;
  EXPECT_EQ(parse(dump.out), expected);
}
