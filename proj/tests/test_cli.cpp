#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "orlicz_elastica/cli.hpp"

namespace oe = orlicz_elastica;
namespace cli = orlicz_elastica::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kCases = ORLICZ_CASES_DIR;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("oe_cli_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> read_report(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return kv;
}

std::string config_error(const std::string& text) {
  std::istringstream in(text);
  try {
    oe::parse_config(in).validate();
  } catch (const oe::ConfigError& e) {
    return e.what();
  }
  return {};
}

int run(const fs::path& cfg, const fs::path& out, std::string* log_text = nullptr, cli::Overrides o = {}) {
  std::ostringstream log, err;
  o.out = out;
  const int code = cli::run_case(cfg, log, err, o);
  if (log_text) *log_text = log.str() + err.str();
  return code;
}

}  // namespace

TEST(Config, UnknownKeyNamesKeyAndLine) {
  const auto msg = config_error("mu = 1\n# comment\nnfunction.q = 3\n");
  EXPECT_NE(msg.find("nfunction.q"), std::string::npos);
  EXPECT_NE(msg.find("line 3"), std::string::npos);
}

TEST(Config, MalformedInputs) {
  EXPECT_NE(config_error("mu = 1\nmu = 2\n").find("line 2"), std::string::npos);
  EXPECT_NE(config_error("mu = abc\n").find("mu"), std::string::npos);
  EXPECT_FALSE(config_error("mu 1\n").empty());
  EXPECT_FALSE(config_error("case = mms_p4\nmu = 2\n").empty());
  EXPECT_FALSE(config_error("case = mms_p4\nnfunction.p = 3\n").empty());
  EXPECT_FALSE(config_error("mesh.grid = 4\n").empty());
  EXPECT_FALSE(config_error("mesh.bc = left:X\n").empty());
  EXPECT_FALSE(config_error("nfunction.family = cubic\n").empty());
  EXPECT_FALSE(config_error("verify.suite = everything\n").empty());
  EXPECT_FALSE(config_error("verify.levels = 1\n").empty());
  EXPECT_FALSE(config_error("solver.tol = -1\n").empty());
  EXPECT_FALSE(config_error("load.xx = sin(\n").empty());
  EXPECT_FALSE(config_error("mesh.file = /nonexistent.mesh\n").empty());
  EXPECT_TRUE(config_error("# nothing but a comment\n\n").empty());
}

TEST(Config, ParsesEveryKey) {
  std::istringstream in(
      "mesh.grid = 6,3\nmesh.extent = 0,2,0,1\nmesh.bc = left:D,right:N,bottom:N,top:N\nmu = 0.5\n"
      "nfunction.family = log_corrected\nnfunction.kappa = 1\nnfunction.p = 3\nnfunction.beta = 1\n"
      "load.xx = x\nload.xy = 0\nload.yy = y\ndirichlet.x = 0\ndirichlet.y = 0\n"
      "solver.tol = 1e-9\nsolver.max_newton = 20\nsolver.linear = cg\nsolver.cg_tol = 1e-11\n"
      "solver.init = random\nsolver.seed = 5\noutput.dir = here\noutput.vtk = true\n"
      "verify.suite = curl\nverify.levels = 3\nverify.coarsest = 4\nverify.margin = 0.1\n");
  const auto c = oe::parse_config(in);
  EXPECT_EQ(c.nx, 6);
  EXPECT_EQ(c.ny, 3);
  EXPECT_EQ(c.extent.x1, 2.0);
  EXPECT_EQ(c.tags.right, oe::BoundaryTag::neumann);
  EXPECT_EQ(c.tags.left, oe::BoundaryTag::dirichlet);
  EXPECT_EQ(c.mu, 0.5);
  EXPECT_EQ(c.family, oe::Family::log_corrected);
  EXPECT_EQ(c.params.beta, 1.0);
  EXPECT_EQ(c.load[0], "x");
  EXPECT_EQ(c.solver.tol_residual, 1e-9);
  EXPECT_EQ(c.solver.max_newton, 20);
  EXPECT_EQ(c.solver.linear_solver, oe::LinearSolverKind::cg);
  EXPECT_EQ(c.solver.seed, 5u);
  EXPECT_EQ(c.init, oe::InitKind::random);
  EXPECT_EQ(c.out_dir, fs::path("here"));
  EXPECT_TRUE(c.vtk);
  EXPECT_EQ(c.suite, oe::Suite::curl);
  EXPECT_EQ(c.levels, 3);
  EXPECT_EQ(c.coarsest, 4);
  EXPECT_EQ(c.margin, 0.1);
}

TEST(Cli, QuadraticCaseSolvesInOneStep) {
  TempDir tmp;
  std::string log;
  ASSERT_EQ(run(kCases / "quadratic_hooke.cfg", tmp.path(), &log), cli::ok) << log;
  const auto report = read_report(tmp.path() / "report.csv");
  EXPECT_EQ(report.at("converged"), "1");
  EXPECT_EQ(report.at("iterations"), "1");
  EXPECT_EQ(report.at("competitor_holds"), "1");
  EXPECT_EQ(report.at("estimate_holds"), "1");
  const std::string sol = slurp(tmp.path() / "solution.csv");
  EXPECT_EQ(sol.substr(0, sol.find('\n')), "node,x,y,u_x,u_y");
  EXPECT_EQ(std::count(sol.begin(), sol.end(), '\n'), 1 + 17 * 17);
  const std::string vtk = slurp(tmp.path() / "solution.vtk");
  EXPECT_EQ(vtk.rfind("# vtk DataFile Version", 0), 0u);
  EXPECT_NE(vtk.find("ASCII"), std::string::npos);
  EXPECT_NE(vtk.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(vtk.find("POINTS 289 double"), std::string::npos);
  EXPECT_NE(vtk.find("CELLS 512 2048"), std::string::npos);
  EXPECT_NE(vtk.find("POINT_DATA 289"), std::string::npos);
  EXPECT_NE(vtk.find("VECTORS displacement double"), std::string::npos);
  EXPECT_TRUE(fs::exists(tmp.path() / "history.csv"));
  EXPECT_TRUE(fs::exists(tmp.path() / "energy.csv"));
}

TEST(Cli, ManufacturedCaseWithLadder) {
  TempDir tmp;
  std::string log;
  ASSERT_EQ(run(kCases / "mms_p4.cfg", tmp.path(), &log), cli::ok) << log;
  std::istringstream ladder(slurp(tmp.path() / "ladder.csv"));
  std::string line;
  std::getline(ladder, line);
  EXPECT_EQ(line, "case,check,n,h,value,rate");
  std::vector<double> err;
  std::vector<int> n;
  while (std::getline(ladder, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string s; std::getline(ss, s, ',');) f.push_back(s);
    ASSERT_GE(f.size(), 5u);
    EXPECT_EQ(f[0], "mms_p4");
    EXPECT_EQ(f[1], "h1");
    n.push_back(std::stoi(f[2]));
    err.push_back(std::stod(f[4]));
  }
  EXPECT_EQ(n, (std::vector<int>{8, 16, 32, 64}));
  ASSERT_EQ(err.size(), 4u);
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_LT(err[i], err[i - 1]);
  EXPECT_NE(slurp(tmp.path() / "summary.csv").find("mms_p4,mms,"), std::string::npos);
  EXPECT_NE(log.find("PASS mms_p4 mms"), std::string::npos);
}

TEST(Cli, ReRunsAreByteIdentical) {
  TempDir a;
  const auto cfg = a.write("c.cfg", "case = mms_p4\nmesh.grid = 8,8\nsolver.init = random\nsolver.seed = 3\n");
  ASSERT_EQ(run(cfg, a.path() / "one"), cli::ok);
  ASSERT_EQ(run(cfg, a.path() / "two"), cli::ok);
  for (const char* f : {"solution.csv", "report.csv", "history.csv", "energy.csv"}) {
    EXPECT_EQ(slurp(a.path() / "one" / f), slurp(a.path() / "two" / f)) << f;
    EXPECT_FALSE(slurp(a.path() / "one" / f).empty()) << f;
  }
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  std::string log;
  const auto unknown = tmp.write("unknown.cfg", "mu = 1\nnfunction.q = 3\n");
  EXPECT_EQ(run(unknown, tmp.path() / "u", &log), cli::config_error);
  EXPECT_NE(log.find("nfunction.q"), std::string::npos);
  EXPECT_EQ(run(tmp.path() / "missing.cfg", tmp.path() / "m"), cli::config_error);

  const auto capped = tmp.write("capped.cfg", "case = mms_p4\nmesh.grid = 8,8\nsolver.max_newton = 1\n");
  EXPECT_EQ(run(capped, tmp.path() / "c", &log), cli::not_converged);
  EXPECT_EQ(read_report(tmp.path() / "c" / "report.csv").at("converged"), "0");

  // Linear data and zero load: the defects sit at roundoff on every level, so no decay
  // can be observed and the check must report failure.
  const auto flat = tmp.write("flat.cfg",
                              "mesh.grid = 4,4\nnfunction.family = quadratic\ndirichlet.x = x\ndirichlet.y = y\n"
                              "verify.suite = harmonic\nverify.levels = 2\nverify.coarsest = 8\n");
  EXPECT_EQ(run(flat, tmp.path() / "f", &log), cli::verification_failed) << log;
  EXPECT_NE(log.find("FAIL config harmonic"), std::string::npos);
}

TEST(Cli, OverridesAndMeshFile) {
  TempDir tmp;
  const auto mesh = tmp.write("square.mesh",
                              "nodes 4\n0 0\n1 0\n0 1\n1 1\nelements 2\n0 1 3\n0 3 2\nboundary 4\n"
                              "0 1 D\n1 3 N\n3 2 N\n2 0 D\n");
  const auto cfg = tmp.write("m.cfg", "mesh.file = square.mesh\nnfunction.family = quadratic\nload.xx = 1\n");
  ASSERT_EQ(run(cfg, tmp.path() / "file"), cli::ok);
  const std::string sol = slurp(tmp.path() / "file" / "solution.csv");
  EXPECT_EQ(std::count(sol.begin(), sol.end(), '\n'), 5);

  cli::Overrides o;
  o.grid = "3,2";
  o.vtk = true;
  ASSERT_EQ(run(cfg, tmp.path() / "grid", nullptr, o), cli::ok);
  const std::string grid = slurp(tmp.path() / "grid" / "solution.csv");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 1 + 4 * 3);
  EXPECT_TRUE(fs::exists(tmp.path() / "grid" / "solution.vtk"));

  cli::Overrides bad;
  bad.bc = "left:N";
  EXPECT_EQ(run(kCases / "quadratic_hooke.cfg", tmp.path() / "bad", nullptr, bad), cli::config_error);

  const auto broken = tmp.write("broken.cfg", "load.xy = 2 * foo\n");
  std::string log;
  EXPECT_EQ(run(broken, tmp.path() / "b", &log), cli::config_error);
  EXPECT_NE(log.find("foo"), std::string::npos);
}

TEST(Cli, BundledGeneralConfigSolves) {
  TempDir tmp;
  std::string log;
  ASSERT_EQ(run(kCases / "cantilever.cfg", tmp.path(), &log), cli::ok) << log;
  EXPECT_EQ(read_report(tmp.path() / "report.csv").at("competitor_holds"), "1");
}

TEST(Cli, ListCasesIsStable) {
  std::ostringstream a, b;
  cli::list_cases(a);
  cli::list_cases(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("quadratic_hooke", 0), 0u);
  EXPECT_NE(a.str().find("\nmms_p4"), std::string::npos);
  EXPECT_EQ(cli::default_verify_cases(), (std::vector<std::string>{"quadratic_hooke", "mms_p4"}));
}

TEST(Cli, VerifyCommandWritesSummary) {
  TempDir tmp;
  std::ostringstream log;
  const int code = cli::run_verify({"quadratic_hooke"}, oe::Suite::estimate, 2, 8, 0.2, {}, tmp.path(), log);
  EXPECT_EQ(code, cli::ok) << log.str();
  const std::string s = slurp(tmp.path() / "summary.csv");
  EXPECT_EQ(s.rfind("case,check,statistic,criterion,pass\n", 0), 0u);
  EXPECT_NE(s.find("quadratic_hooke,estimate,"), std::string::npos);
  EXPECT_THROW(cli::run_verify({"nope"}, oe::Suite::all, 2, 4, 0.2, {}, tmp.path(), log), oe::InvalidParameter);
}
