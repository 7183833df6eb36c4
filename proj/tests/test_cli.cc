// End-to-end tests of daeobs_cli: exit codes, golden replay, determinism,
// and oracle checks of the committed golden values.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "daeobs/linalg.h"
#include "test_util.h"

namespace daeobs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixtures = DAEOBS_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "daeobs_cli_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove_all(p);
  return p;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::vector<std::string>& args, std::string* err = nullptr) {
  std::string cmd = quote(DAEOBS_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  const fs::path err_file = scratch("stderr.txt");
  cmd += " 2>" + quote(err_file.string()) + " >/dev/null";
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(err_file);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

Matrix from_json(const json& j) {
  Matrix m(j["rows"].get<int>(), j["cols"].get<int>());
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < m.cols(); ++c) m(i, c) = j["data"][i * m.cols() + c].get<double>();
  return m;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  if (fs::is_directory(a)) {
    ASSERT_TRUE(fs::is_directory(b)) << b;
    std::vector<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) names_a.push_back(e.path().filename());
    for (const auto& e : fs::directory_iterator(b)) names_b.push_back(e.path().filename());
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    ASSERT_EQ(names_a, names_b);
    for (const auto& n : names_a) expect_same_tree(a / n, b / n);
  } else {
    EXPECT_TRUE(slurp(a) == slurp(b)) << a << " differs from " << b;
  }
}

TEST(CliTest, ManifestReplaysExactly) {
  const json manifest = load_json(kFixtures / "manifest.json");
  int index = 0;
  for (const auto& c : manifest["cases"]) {
    const fs::path out = scratch("replay_" + std::to_string(index++));
    std::vector<std::string> args{c["command"].get<std::string>(),
                                  (kFixtures / c["fixture"].get<std::string>()).string()};
    for (const auto& a : c["args"]) args.push_back(a.get<std::string>());
    args.push_back("--output");
    args.push_back(out.string());
    std::string err;
    const int code = run_cli(args, &err);
    EXPECT_EQ(code, c["exit"].get<int>()) << c.dump() << "\n" << err;
    if (!c["golden"].is_null() && code == 0) {
      expect_same_tree(kFixtures / c["golden"].get<std::string>(), out);
    }
  }
}

TEST(CliTest, ErrorMessagesNameTheStage) {
  std::string err;
  EXPECT_EQ(run_cli({"synthesize-observer", (kFixtures / "bad_q0.json").string()}, &err), 1);
  EXPECT_NE(err.find("Q0 must be symmetric positive definite"), std::string::npos) << err;
  EXPECT_EQ(run_cli({"synthesize-observer", (kFixtures / "unstabilizable_estimation.json").string()},
                    &err),
            2);
  EXPECT_NE(err.find("not stabilizable"), std::string::npos) << err;
  EXPECT_EQ(run_cli({"synthesize-observer", (kFixtures / "not_estimable.json").string()}, &err), 3);
  EXPECT_NE(err.find("not estimable"), std::string::npos) << err;
  EXPECT_EQ(run_cli({"synthesize-observer", (kFixtures / "missing.json").string()}, &err), 1);
  EXPECT_EQ(run_cli({"no-such-command"}), 1);
}

TEST(CliTest, RepeatedRunsAreByteIdentical) {
  const std::string input = (kFixtures / "rank1_estimation.json").string();
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const auto& out : {a, b}) {
    ASSERT_EQ(run_cli({"simulate", input, "--trials", "3", "--horizon", "4", "--seed", "5",
                       "--output", out.string()}),
              0);
  }
  expect_same_tree(a, b);
  const fs::path ra = scratch("det_a.json");
  const fs::path rb = scratch("det_b.json");
  ASSERT_EQ(run_cli({"check-equivalence", input, "--trials", "4", "-o", ra.string()}), 0);
  ASSERT_EQ(run_cli({"check-equivalence", input, "--trials", "4", "-o", rb.string()}), 0);
  expect_same_tree(ra, rb);
}

TEST(CliTest, ZeroFunctionalGivesZeroEstimateColumn) {
  json doc = load_json(kFixtures / "regular_estimation.json");
  doc["matrices"]["ell"]["data"] = json::array({0, 0});
  const fs::path input = scratch("zero_ell.json");
  std::ofstream(input) << doc.dump();
  const fs::path out = scratch("zero_ell_out");
  ASSERT_EQ(run_cli({"simulate", input.string(), "--horizon", "2", "--output", out.string()}), 0);
  std::istringstream csv(slurp(out / "run_000.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,y_1,estimate,true_value,error");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(std::stod(cells[2]), 0.0);
    ++rows;
  }
  EXPECT_GT(rows, 100);
}

TEST(CliTest, CleanRunErrorTrendsToZero) {
  const fs::path out = scratch("clean");
  ASSERT_EQ(run_cli({"simulate", (kFixtures / "regular_estimation.json").string(), "--clean",
                     "--horizon", "20", "--output", out.string()}),
            0);
  const json summary = load_json(out / "summary.json");
  const json& run = summary["runs"][0];
  EXPECT_LT(run["trailing_max_abs_error"].get<double>(),
            1e-3 * run["initial_abs_error"].get<double>());
}

// Golden values against independent computations.

TEST(GoldenOracleTest, RegularEstimationMatchesClassicalFilter) {
  const json fx = load_json(kFixtures / "regular_estimation.json")["matrices"];
  const Matrix a = from_json(fx["A"]);
  const Matrix h = from_json(fx["H"]);
  const Matrix q = from_json(fx["Q"]);
  const Matrix r = from_json(fx["R"]);
  const Matrix ell = from_json(fx["ell"]);
  const Matrix p = testing::newton_care(a.transpose(), h.transpose(), q.inverse(), r.inverse(),
                                        Matrix::Zero(2, 1),
                                        testing::bass_gain(a.transpose(), h.transpose()));
  const double sigma = (ell.transpose() * p * ell)(0, 0);
  const json golden = load_json(kFixtures / "golden/regular_estimation.synthesize-observer.json");
  EXPECT_LT(testing::rel_diff(golden["observer"]["sigma"].get<double>(), sigma), 1e-10);
}

TEST(GoldenOracleTest, RankOneEstimationMatchesScalarReduction) {
  const json golden = load_json(kFixtures / "golden/rank1_estimation.synthesize-observer.json");
  EXPECT_NEAR(golden["observer"]["sigma"].get<double>(), std::sqrt(3.0) - 1.0, 1e-12);
  EXPECT_EQ(golden["dimensions"]["n_hat"].get<int>(), 1);
}

TEST(GoldenOracleTest, DoubleIntegratorControl) {
  // ẍ = u with ∫ |x|² + u²: P = [[√3, 1], [1, √3]] in the original state.
  const json golden = load_json(kFixtures / "golden/regular_control.solve-lq.json");
  EXPECT_EQ(golden["dimensions"]["n_hat"].get<int>(), 2);
  const Matrix p = from_json(golden["riccati"]["P"]);
  const json lti = load_json(kFixtures / "golden/regular_control.associated-lti.json");
  const Matrix cs = from_json(lti["lti"]["C_s"]);
  const Matrix p_state = cs.inverse().transpose() * p * cs.inverse();
  Matrix expected(2, 2);
  expected << std::sqrt(3.0), 1.0, 1.0, std::sqrt(3.0);
  EXPECT_LT(testing::rel_diff(p_state, expected), 1e-10);
}

TEST(GoldenOracleTest, AlgebraicSystemHasNoState) {
  const json golden = load_json(kFixtures / "golden/algebraic_control.associated-lti.json");
  EXPECT_EQ(golden["dimensions"]["n_hat"].get<int>(), 0);
  const json regular = load_json(kFixtures / "golden/regular_control.associated-lti.json");
  EXPECT_EQ(regular["dimensions"]["n_hat"].get<int>(), regular["dimensions"]["n"].get<int>());
}

TEST(GoldenOracleTest, EquivalenceReportPasses) {
  const json golden = load_json(kFixtures / "golden/equivalence_control.check-equivalence.json");
  EXPECT_TRUE(golden["pass"].get<bool>());
  EXPECT_EQ(golden["trials"].get<int>(), 20);
}

}  // namespace
}  // namespace daeobs
