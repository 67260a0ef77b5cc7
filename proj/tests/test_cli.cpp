#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dsotto/cli/config.hpp"
#include "dsotto/cli/execute.hpp"
#include "dsotto/cli/table.hpp"

using namespace dsotto;
using namespace dsotto::cli;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dsotto_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

RunConfig parse(const std::string& text) { return from_json(json::parse(text)); }

std::vector<std::string> header_of(const RunConfig& c) {
  std::stringstream ss;
  const RunResult r = run(c);
  write_csv(ss, header_lines(c), r.table, c.precision);
  return read_csv(ss).columns;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(DSOTTO_CLI_PATH) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST(Config, CommandDefaults) {
  const RunConfig q = parse(R"({"command":"quasistatic"})");
  EXPECT_EQ(q.n_atoms, 8);
  EXPECT_EQ(q.grid.size(), 1u);
  EXPECT_EQ(q.grid[0].axis, "lambda");
  const RunConfig f = parse(R"({"command":"finite-time"})");
  EXPECT_EQ(f.n_atoms, 2);
  EXPECT_EQ(f.schedule.n_cycles, 5);
  const RunConfig a = parse(R"({"command":"asymmetric-u"})");
  EXPECT_EQ(a.lambda, 0.48);
  EXPECT_EQ(a.grid[0].values.size(), 21u);
  EXPECT_EQ(a.grid[1].values.size(), 21u);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(parse(R"({"command":"quasistatic","model":{"lamda":0.3}})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"quasistatic","colour":"red"})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"quasistatic","grid":[{"axis":"lambda","values":[0.1],"step":1}]})"),
               ConfigError);
}

TEST(Config, RangeErrorsNameTheBound) {
  try {
    parse(R"({"command":"quasistatic","model":{"u":1.2}})");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("|u| < omega"), std::string::npos);
  }
  EXPECT_THROW(parse(R"({"command":"quasistatic","bath":{"t_hot":0.05}})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"quasistatic","model":{"n_atoms":0}})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"spectrum","output":{"format":"xml"}})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"nonsense"})"), ConfigError);
  EXPECT_THROW(parse(R"({"model":{}})"), ConfigError);
}

TEST(Config, GridAxesMustMatchCommand) {
  EXPECT_THROW(parse(R"({"command":"phase-diagram","grid":[{"axis":"lambda","values":[0.1]}]})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"quasistatic","grid":[{"axis":"tau2","values":[1]}]})"), ConfigError);
  EXPECT_THROW(parse(R"({"command":"spectrum","grid":[{"axis":"lambda","values":[0.1]}]})"), ConfigError);
  EXPECT_NO_THROW(parse(R"({"command":"power-scan","grid":[{"axis":"tau1","values":[10]},{"axis":"tau2","values":[1]}]})"));
}

TEST(Config, GridFromStartStopCount) {
  const RunConfig c = parse(R"({"command":"quasistatic","grid":[{"axis":"u","start":-0.5,"stop":0.5,"count":5}]})");
  EXPECT_EQ(c.grid[0].values, (std::vector<double>{-0.5, -0.25, 0.0, 0.25, 0.5}));
}

TEST(Config, SymmetricScheduleUnlessGiven) {
  const RunConfig a = parse(R"({"command":"finite-time","schedule":{"tau1":300,"tau2":7}})");
  EXPECT_EQ(a.schedule.tau3, 300.0);
  EXPECT_EQ(a.schedule.tau4, 7.0);
  const RunConfig b = parse(R"({"command":"finite-time","schedule":{"tau2":7,"tau4":3}})");
  EXPECT_EQ(b.schedule.tau4, 3.0);
}

TEST(Config, RoundTripIsStable) {
  const RunConfig c = parse(R"({"command":"quasistatic","model":{"lambda":0.3,"u":0.2},"workers":1})");
  const RunConfig d = from_json(to_json(c));
  EXPECT_EQ(to_json(c).dump(), to_json(d).dump());
  EXPECT_EQ(config_hash(c), config_hash(d));
  RunConfig e = c;
  e.lambda = 0.31;
  EXPECT_NE(config_hash(c), config_hash(e));
}

TEST(Config, GridFlagSyntax) {
  const json a = parse_grid_flag("lambda:0.1:0.5:5");
  EXPECT_EQ(a["axis"], "lambda");
  EXPECT_EQ(a["count"], 5);
  const json b = parse_grid_flag("tau2=0.5,5,20");
  EXPECT_EQ(b["values"].size(), 3u);
  EXPECT_THROW(parse_grid_flag("lambda:0.1"), ConfigError);
  EXPECT_THROW(parse_grid_flag("tau2=1,x"), ConfigError);
}

TEST(Csv, FormattingAndQuoting) {
  EXPECT_EQ(format_number(0.1, 12), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0, 12), "0.333333333333");
  EXPECT_EQ(format_number(-2.5e-17, 3), "-2.5e-17");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(split_csv_line("1,\"a,b\",,x"), (std::vector<std::string>{"1", "a,b", "", "x"}));
}

TEST(Csv, RoundTrip) {
  Table t{{"x", "mode", "eta", "error"}, {}};
  t.rows.push_back({Cell(0.25), Cell(std::string("engine")), Cell(0.5), Cell(std::string())});
  t.rows.push_back({Cell(0.5), Cell(std::monostate{}), Cell(std::monostate{}), Cell(std::string("bad, very"))});
  std::stringstream ss;
  write_csv(ss, {"meta one", "meta two"}, t, 12);
  const CsvDocument d = read_csv(ss);
  EXPECT_EQ(d.metadata, (std::vector<std::string>{"meta one", "meta two"}));
  EXPECT_EQ(d.columns, t.columns);
  ASSERT_EQ(d.rows.size(), 2u);
  EXPECT_EQ(d.rows[0][1], "engine");
  EXPECT_EQ(d.rows[1][2], "");
  EXPECT_EQ(d.rows[1][3], "bad, very");
}

// Column layouts are part of the file format read by the plotting scripts.
TEST(Golden, Headers) {
  RunConfig s = parse(R"({"command":"spectrum","output":{"n_levels":3}})");
  EXPECT_EQ(header_of(s), (std::vector<std::string>{"level", "energy", "parity"}));

  RunConfig q = parse(R"({"command":"phase-diagram","model":{"n_atoms":2},
      "grid":[{"axis":"lambda","values":[0.3]},{"axis":"u","values":[0.0]}]})");
  EXPECT_EQ(header_of(q), (std::vector<std::string>{"lambda", "u", "q_hot", "q_cold", "work", "efficiency",
                                                    "mode", "lambda_c_cold", "hot_converged",
                                                    "cold_converged", "error"}));

  RunConfig f = parse(R"({"command":"asymmetric-time","schedule":{"tau1":20,"n_cycles":1},
      "grid":[{"axis":"tau2","values":[0.5]},{"axis":"tau4","values":[0.5]}]})");
  EXPECT_EQ(header_of(f), (std::vector<std::string>{"tau2", "tau4", "cycle", "q_hot", "q_cold", "work",
                                                    "efficiency", "eta_via_entropy", "power",
                                                    "entropy_total", "friction_expand",
                                                    "friction_compress", "fidelity", "steady", "mode",
                                                    "first_law_residual", "error"}));
}

TEST(Execute, WritesCsvAndSidecar) {
  const fs::path out = scratch("qs.csv");
  RunConfig c = parse(R"({"command":"quasistatic","model":{"n_atoms":2},
      "grid":[{"axis":"lambda","values":[0.2,0.4]},{"axis":"u4","values":[0.0,1.0]}]})");
  c.output_path = out.string();
  std::stringstream log;
  EXPECT_EQ(execute(c, log), 2);  // u4 = 1 sits on |u| = omega_c
  std::ifstream in(out);
  const CsvDocument d = read_csv(in);
  ASSERT_EQ(d.rows.size(), 4u);
  EXPECT_EQ(d.metadata[0], "dsotto 0.1.0 quasistatic");
  EXPECT_EQ(d.metadata[1], "config_hash: " + config_hash(c));
  const int err = d.column("error");
  EXPECT_TRUE(d.rows[0][err].empty());
  EXPECT_FALSE(d.rows[1][err].empty());
  EXPECT_EQ(d.rows[1][d.column("work")], "");

  std::ifstream side(out.string() + ".meta.json");
  const json meta = json::parse(side);
  EXPECT_EQ(meta["failed_points"], 2);
  EXPECT_EQ(meta["config_hash"], config_hash(c));
  EXPECT_EQ(meta["certificates"].size(), 4u);
}

TEST(Execute, JsonMatchesCsvDigits) {
  RunConfig c = parse(R"({"command":"spectrum","output":{"n_levels":4,"precision":6}})");
  const RunResult r = run(c);
  const json rows = table_to_json(r.table, 6);
  std::stringstream ss;
  write_csv(ss, {}, r.table, 6);
  const CsvDocument d = read_csv(ss);
  for (int i = 0; i < 4; ++i)
    EXPECT_EQ(format_number(rows[i]["energy"].get<double>(), 6), d.rows[i][1]);
}

TEST(Execute, SerialAndParallelRowsAgree) {
  RunConfig c = parse(R"({"command":"quasistatic","model":{"n_atoms":2},
      "grid":[{"axis":"lambda","start":0.1,"stop":0.6,"count":6},{"axis":"u","values":[-0.3,0.3]}]})");
  c.workers = 1;
  const RunResult a = run(c);
  c.workers = 3;
  const RunResult b = run(c);
  ASSERT_EQ(a.table.rows.size(), b.table.rows.size());
  for (std::size_t i = 0; i < a.table.rows.size(); ++i) EXPECT_TRUE(a.table.rows[i] == b.table.rows[i]);
}

TEST(Binary, ExitCodes) {
  const fs::path out = scratch("bin.csv");
  EXPECT_EQ(run_binary("spectrum --n-levels 3 --output " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out.string() + ".meta.json"));
  EXPECT_EQ(run_binary("quasistatic --u 1.5 --output " + out.string()), 1);
  EXPECT_EQ(run_binary("quasistatic --grid lambda:0.1:0.2 --output " + out.string()), 1);
  EXPECT_EQ(run_binary("--output " + out.string()), 1);
  EXPECT_EQ(run_binary("quasistatic --n-atoms 2 --grid u4=0,1 --output " + out.string()), 2);
}

TEST(Binary, FlagsOverrideConfigFile) {
  const fs::path cfg = scratch("cfg.json"), out = scratch("override.csv");
  {
    std::ofstream f(cfg);
    f << R"({"command":"spectrum","model":{"lambda":0.1},"output":{"n_levels":2,"path":")" << out.string()
      << R"("}})";
  }
  ASSERT_EQ(run_binary("-c " + cfg.string() + " --lambda 0.3"), 0);
  std::ifstream in(out);
  const CsvDocument d = read_csv(in);
  EXPECT_NE(d.metadata[2].find("\"lambda\":0.3"), std::string::npos);
  EXPECT_EQ(d.rows.size(), 2u);
}
