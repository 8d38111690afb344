#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "translab/cli.hpp"

using namespace translab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig config(const std::string& command, const std::string& text, const std::string& tag) {
  ExperimentConfig c;
  c.command = command;
  c.values = parse_config_text(text);
  c.output_dir = (fs::temp_directory_path() / ("translab_cli_test_" + tag)).string();
  fs::remove_all(c.output_dir);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// value column of the first row named q
double csv_value(const fs::path& p, const std::string& q) {
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) f.push_back(tok);
    if (!f.empty() && f[0] == q) return std::stod(f.at(2));
  }
  throw std::runtime_error("row " + q + " missing in " + p.string());
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(TRANSLAB_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ConfigText, CommentsBlanksAndErrors) {
  const auto kv = parse_config_text("# header\nproblem.s = 0.75  # order\n\n  kernel.nu=2\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("problem.s"), "0.75");
  EXPECT_EQ(kv.at("kernel.nu"), "2");
  EXPECT_THROW(parse_config_text("problem.s 0.75\n"), DomainError);
  EXPECT_THROW(parse_config_text(" = 3\n"), DomainError);
}

TEST(ConfigText, NumbersAndBuiltins) {
  ExperimentConfig c;
  c.values = {{"a", "1.5"}, {"b", "x1"}, {"c", "2.5"}};
  EXPECT_EQ(c.num("a", 0), 1.5);
  EXPECT_EQ(c.num("missing", 7), 7);
  EXPECT_THROW(c.num("b", 0), DomainError);
  EXPECT_THROW(c.integer("c", 0), DomainError);
  EXPECT_EQ(parse_list("1, 2.5,3", "k"), (std::vector<double>{1, 2.5, 3}));
  const auto [name, args] = parse_builtin("ramp:1,2", "k");
  EXPECT_EQ(name, "ramp");
  EXPECT_EQ(args, (std::vector<double>{1, 2}));
  const auto sp = ProblemSpec::make(2, 0.5, KernelSpec::constant_pair(1));
  EXPECT_EQ(builtin_field("ramp:1,2,3", "k", sp, nullptr)(Point{1, 1, 0}), 6.0);
  EXPECT_EQ(builtin_field("power:0.5", "k", sp, nullptr)(Point{0, 4, 0}), 2.0);
  EXPECT_EQ(builtin_field("power:0.5", "k", sp, nullptr)(Point{0, -4, 0}), 0.0);
  EXPECT_THROW(builtin_field("ramp:1", "k", sp, nullptr), DomainError);
  EXPECT_THROW(builtin_field("profile", "k", sp, nullptr), DomainError);
  EXPECT_THROW(builtin_field("spline:1", "k", sp, nullptr), DomainError);
}

TEST(Validate, WellFormedConfigIsClean) {
  EXPECT_TRUE(validate(config("solve", "problem.n = 2\nproblem.s = 0.6\nkernel.nu = 1.5\n", "ok")).empty());
}

TEST(Validate, ReportsViolations) {
  const auto drift = validate(config("solve", "problem.s = 0.3\nproblem.b = 1\n", "drift"));
  EXPECT_TRUE(mentions(drift, "standing assumption"));
  const auto nu = validate(config("solve", "kernel.nu = -1\n", "nu"));
  EXPECT_FALSE(nu.empty());
  EXPECT_TRUE(mentions(validate(config("solve", "mesh.hx = 1\n", "key")), "unknown key mesh.hx"));
  EXPECT_TRUE(mentions(validate(config("plot", "", "cmd")), "unknown command"));
  EXPECT_FALSE(validate(config("solve", "mesh.grading = 1.5\n", "grading")).empty());
}

TEST(Run, ExponentReproducesKnownRoot) {
  const auto c = config("exponent", "problem.s = 0.75\nkernel.nu = 6\n", "exponent");
  std::ostringstream err;
  ASSERT_EQ(run(c, err), 0) << err.str();
  EXPECT_NEAR(csv_value(fs::path(c.output_dir) / "exponent.csv", "alpha0"), 1.0, 1e-8);
}

TEST(Run, ProfileWritesCoefficientsAndResiduals) {
  const auto c = config("profile", "problem.s = 0.5\nkernel.nu = 1\nprofile.points = 4\n", "profile");
  std::ostringstream err;
  ASSERT_EQ(run(c, err), 0) << err.str();
  const auto P = parse_profile(slurp(fs::path(c.output_dir) / "profile.txt"));
  EXPECT_NEAR(P.alpha0, 0.37100964820355159, 1e-9);
  const auto csv = slurp(fs::path(c.output_dir) / "profile.csv");
  EXPECT_NE(csv.find("residual_omega2,0.0625,"), std::string::npos);
  EXPECT_NE(csv.find("residual_omega1,0.0625,"), std::string::npos);
}

TEST(Run, SolveReproducesConstantsAndIsDeterministic) {
  const std::string text = "problem.n = 1\nproblem.s = 0.6\nproblem.exterior = constant:1.5\nmesh.h = 0.1\n";
  auto a = config("solve", text, "solve_a"), b = config("solve", text, "solve_b");
  std::ostringstream err;
  ASSERT_EQ(run(a, err), 0) << err.str();
  ASSERT_EQ(run(b, err), 0) << err.str();
  EXPECT_LT(csv_value(fs::path(a.output_dir) / "solve.csv", "max_error"), 1e-10);
  EXPECT_EQ(slurp(fs::path(a.output_dir) / "solve.csv"), slurp(fs::path(b.output_dir) / "solve.csv"));
  EXPECT_EQ(slurp(fs::path(a.output_dir) / "field.txt"), slurp(fs::path(b.output_dir) / "field.txt"));
}

TEST(Run, ExitCodes) {
  std::ostringstream err;
  EXPECT_EQ(run(config("solve", "kernel.nu = -1\n", "bad"), err), 2);
  EXPECT_NE(err.str().find("validation:"), std::string::npos);
  // the sampling window reaches past the support of the profile
  const auto numeric = config("analyze", "problem.s = 0.75\nkernel.nu = 2\nanalysis.depths = 10\nanalysis.window_max = 3\n", "e3");
  EXPECT_EQ(run(numeric, err), 3);
}

TEST(Binary, ExitCodesEndToEnd) {
  const fs::path dir = fs::temp_directory_path() / "translab_cli_test_bin";
  fs::create_directories(dir);
  std::ofstream(dir / "ok.cfg") << "problem.s = 0.75\nkernel.nu = 6\n";
  std::ofstream(dir / "bad.cfg") << "problem.s = 0.3\nproblem.b = 1\nkernel.nu = -1\n";
  std::ofstream(dir / "mismatch.cfg") << "command = solve\nproblem.s = 0.75\n";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("exponent --config " + (dir / "ok.cfg").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "exponent.csv"));
  EXPECT_EQ(run_cli("exponent --config " + (dir / "bad.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("exponent --config " + (dir / "mismatch.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("exponent --config " + (dir / "missing.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}
