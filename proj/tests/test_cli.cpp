#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polyb/commands.hpp"
#include "polyb/mesh_io.hpp"
#include "polyb/output.hpp"

using namespace polyb;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto* info = testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::path(testing::TempDir()) / "polyb_cli" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

// Runs the installed binary; returns its exit status.
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(POLYB_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  for (std::string line; std::getline(f, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return config_from_stream(in);
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndLevels) {
  const RunConfig cfg = parse(
      "# demo\n"
      "problem = example2   # trailing comment\n"
      "\n"
      "nu = 0.5\n kappa=2\n"
      "levels = 4, 8,16\n"
      "family = nonconvex\n"
      "tau2 = 0.01\n"
      "domain = -1, 0, 1, 2\n");
  EXPECT_EQ(cfg.problem, "example2");
  EXPECT_EQ(cfg.params.nu, 0.5);
  EXPECT_EQ(cfg.params.kappa, 2.0);
  EXPECT_EQ(cfg.levels, (std::vector<int>{4, 8, 16}));
  EXPECT_EQ(cfg.stab.c2, 0.01);
  ASSERT_TRUE(cfg.domain.has_value());
  EXPECT_EQ(cfg.domain->lo, Point(-1, 0));
  EXPECT_EQ(cfg.domain->hi, Point(1, 2));
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(make_problem(cfg).domain.hi, Point(1, 2));
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  try {
    parse("problem = example1\nvelocity = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("velocity"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
  }
  EXPECT_THROW(parse("nu = 1\nnu = 2\n"), ConfigError);
  EXPECT_THROW(parse("nu = fast\n"), ConfigError);
  EXPECT_THROW(parse("order = 1.5\n"), ConfigError);
  EXPECT_THROW(parse("levels = 4,,8\n"), ConfigError);
  EXPECT_THROW(parse("just a line\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST(Config, ValidateNamesTheOffendingKey) {
  const auto fails_on = [](const std::string& text, const std::string& key) {
    try {
      parse(text).validate();
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(key) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails_on("kappa = -1\n", "kappa"));
  EXPECT_TRUE(fails_on("order = 3\n", "order"));
  EXPECT_TRUE(fails_on("family = hexagons\n", "family"));
  EXPECT_TRUE(fails_on("problem = example7\n", "problem"));
  EXPECT_TRUE(fails_on("samples = 0\n", "samples"));
  EXPECT_TRUE(fails_on("tol = 0\n", "tol"));
}

TEST(Commands, ConvergeCsvRoundTrip) {
  const fs::path dir = scratch_dir();
  RunConfig cfg;
  cfg.levels = {5, 10};
  cfg.out = dir.string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_converge(cfg, out, err), kExitOk) << err.str();

  const auto rows = read_csv(dir / "convergence.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][0], "level");
  EXPECT_EQ(rows[0][1], "h");
  EXPECT_EQ(rows[1][0], "5");
  EXPECT_EQ(rows[0].size(), rows[1].size());

  // %.17e values read back to the in-memory study bit for bit.
  StudyOptions o;
  o.params = cfg.stab;
  const ConvergenceTable t = convergence_study(example1(), MeshFamily::squares, {5, 10}, 1, o);
  for (int r = 0; r < 2; ++r) {
    EXPECT_EQ(std::stod(rows[r + 1][1]), t.rows[r].h);
    for (int i = 0; i < kNumErrors; ++i) {
      const auto col = std::find(rows[0].begin(), rows[0].end(), kErrorNames[i]) - rows[0].begin();
      ASSERT_LT(col, static_cast<long>(rows[0].size()));
      EXPECT_EQ(std::stod(rows[r + 1][col]), t.rows[r].errors[i]);
      const std::string& rate = rows[r + 1][col + 1];
      if (r == 0) EXPECT_EQ(rate, "nan");
      else EXPECT_EQ(std::stod(rate), t.rows[r].rates[i]);
    }
  }
  EXPECT_EQ(format_double(0.1), "1.00000000000000006e-01");
}

TEST(Commands, SolveWritesVtkAndSummary) {
  const fs::path dir = scratch_dir();
  RunConfig cfg;
  cfg.levels = {10};
  cfg.out = dir.string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_solve(cfg, out, err), kExitOk) << err.str();
  const std::string vtk = slurp(dir / "solution.vtk");
  EXPECT_EQ(vtk.rfind("# vtk DataFile Version 3.0", 0), 0u);
  EXPECT_NE(vtk.find("POINTS 121 double"), std::string::npos);
  EXPECT_NE(vtk.find("CELLS 100 500"), std::string::npos);
  for (const char* field : {"SCALARS u1", "SCALARS u2", "SCALARS p", "SCALARS theta", "CELL_DATA 100", "SCALARS umag"}) {
    EXPECT_NE(vtk.find(field), std::string::npos) << field;
  }
  const auto summary = read_csv(dir / "summary.csv");
  EXPECT_EQ(summary[0], (std::vector<std::string>{"quantity", "value"}));
  EXPECT_EQ(summary[1][0], "iterations");
  EXPECT_GE(std::stoi(summary[1][1]), 1);
}

TEST(Commands, ZeroProblemGivesZeroFields) {
  const fs::path dir = scratch_dir();
  RunConfig cfg;
  cfg.problem = "zero";
  cfg.family = "voronoi";
  cfg.levels = {6};
  cfg.out = dir.string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_solve(cfg, out, err), kExitOk) << err.str();
  std::ifstream vtk(dir / "solution.vtk");
  bool in_data = false;
  int values = 0;
  for (std::string line; std::getline(vtk, line);) {
    if (line.rfind("POINT_DATA", 0) == 0) in_data = true;
    if (!in_data || line.empty() || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    EXPECT_EQ(std::stod(line), 0.0) << line;
    ++values;
  }
  EXPECT_GT(values, 0);
}

TEST(Commands, EquivalenceWritesOneRowPerLevel) {
  const fs::path dir = scratch_dir();
  RunConfig cfg;
  cfg.levels = {4, 8, 16};
  cfg.samples = 20;
  cfg.out = dir.string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_equivalence(cfg, out, err), kExitOk) << err.str();
  const auto rows = read_csv(dir / "equivalence.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"level", "h", "min_ratio", "max_ratio", "spread"}));
  for (int r = 1; r <= 3; ++r) {
    EXPECT_NEAR(std::stod(rows[r][4]), std::stod(rows[r][3]) / std::stod(rows[r][2]), 1e-12 * std::stod(rows[r][4]));
  }
}

TEST(Commands, MeshToStdoutIsReadable) {
  RunConfig cfg;
  cfg.family = "nonconvex";
  cfg.levels = {4};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_mesh(cfg, out, err, true), kExitOk) << err.str();
  std::istringstream in(out.str());
  const PolygonalMesh m = read_mesh(in);
  EXPECT_EQ(m.num_cells(), generate_structured(MeshFamily::nonconvex_cells, 4).num_cells());

  cfg.levels = {4, 8};
  EXPECT_EQ(cmd_mesh(cfg, out, err, true), kExitConfig);
}

TEST(Commands, ConfigErrorsWriteNothing) {
  const fs::path dir = scratch_dir() / "never";
  RunConfig cfg;
  cfg.samples = 0;
  cfg.out = dir.string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_equivalence(cfg, out, err), kExitConfig);
  EXPECT_FALSE(fs::exists(dir));
  cfg = RunConfig{};
  cfg.problem = "cavity";
  cfg.out = dir.string();
  EXPECT_EQ(cmd_converge(cfg, out, err), kExitConfig);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch_dir();
  const fs::path log = dir / "log.txt";
  const fs::path good = write_config(dir, "problem = example1\nlevels = 4\nout = " + (dir / "out").string() + "\n");
  EXPECT_EQ(run_cli("solve --config '" + good.string() + "'", log), 0) << slurp(log);
  EXPECT_EQ(run_cli("solve", log), 1);
  EXPECT_EQ(run_cli("frobnicate --config '" + good.string() + "'", log), 1);
  EXPECT_EQ(run_cli("solve --config '" + (dir / "missing.cfg").string() + "'", log), 1);
  EXPECT_EQ(run_cli("solve --config '" + good.string() + "' --kappa -1", log), 1);
  EXPECT_NE(slurp(log).find("kappa"), std::string::npos);
  EXPECT_EQ(run_cli("solve --config '" + good.string() + "' --max-iter 2 --levels 8", log), 2);

  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "problem = example1\ncolour = blue\n";
  EXPECT_EQ(run_cli("solve --config '" + bad.string() + "'", log), 1);
}

TEST(Binary, DeterministicOutputAcrossRunsAndThreads) {
  const fs::path dir = scratch_dir();
  const fs::path log = dir / "log.txt";
  const fs::path cfg = write_config(dir, "problem = example2\nfamily = voronoi\nlevels = 6\norder = 2\n");
  std::vector<std::string> outputs;
  for (const char* run : {"a", "b", "c"}) {
    const std::string env = std::string(run) == "c" ? "POLYB_THREADS=3 " : "";
    const std::string cmd = env + std::string(POLYB_CLI_PATH) + " solve --config '" + cfg.string() + "' --out '" +
                            (dir / run).string() + "' > '" + log.string() + "' 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0) << slurp(log);
    outputs.push_back(slurp(dir / run / "solution.vtk") + slurp(dir / run / "summary.csv"));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_EQ(outputs[0], outputs[2]);
}

TEST(Binary, OverridesTakePrecedence) {
  const fs::path dir = scratch_dir();
  const fs::path log = dir / "log.txt";
  const fs::path cfg = write_config(dir, "levels = 4, 8\nfamily = squares\n");
  ASSERT_EQ(run_cli("mesh --config '" + cfg.string() + "' --family triangles --levels 3 --out '" + dir.string() + "'", log),
            0)
      << slurp(log);
  EXPECT_TRUE(fs::exists(dir / "mesh_triangles_3.txt"));
  EXPECT_FALSE(fs::exists(dir / "mesh_squares_4.txt"));
}
