#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

using Json = nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
  double seconds = 0.0;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" ENTDIST_CLI_PATH "\" " + args + " 2>/dev/null";
  CliRun r;
  const auto t0 = std::chrono::steady_clock::now();
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Json run_json(const std::string& args, int expected_code = 0) {
  const CliRun r = run(args);
  EXPECT_EQ(r.code, expected_code) << args;
  return Json::parse(r.out);
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("entdist_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CliFef, Examples) {
  EXPECT_NEAR(run_json("fef --dim 2 --spectrum 0.8,0.2")["fef"].get<double>(), 0.9, 1e-12);
  EXPECT_NEAR(run_json("fef --dim 3 --spectrum uniform")["fef"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(run_json("fef --dim 2 --spectrum 1,0")["fef"].get<double>(), 0.5, 1e-15);
}

TEST(CliFef, AmplitudesAndNormalize) {
  const double a1 = std::sqrt(0.8), a2 = std::sqrt(0.2);
  const std::string amps = std::to_string(a1) + "," + std::to_string(a2);
  EXPECT_NEAR(run_json("fef --amplitudes --normalize --spectrum " + amps)["fef"].get<double>(), 0.9, 1e-6);
  EXPECT_NEAR(run_json("fef --normalize --spectrum 2,8")["fef"].get<double>(), 0.9, 1e-12);
  EXPECT_EQ(run("fef --spectrum 2,8").code, 2);
}

TEST(CliFef, SweepCsv) {
  const CliRun r = run("fef --dim 2 --sweep 3 --csv");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_NE(header.find("fef"), std::string::npos);
  EXPECT_NE(header.find("negativity"), std::string::npos);
  int rows = 0;
  while (std::getline(lines, row)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(CliErrors, InputErrorsExitTwo) {
  EXPECT_EQ(run("fef --spectrum 0.2,0.8").code, 2);      // ascending
  EXPECT_EQ(run("fef --dim 3 --spectrum 0.8,0.2").code, 2);
  EXPECT_EQ(run("fef --spectrum abc").code, 2);
  EXPECT_EQ(run("protocol --n-states 3 --dim 2 --nonsense").code, 2);
  EXPECT_EQ(run("bounds --dim 2 --n-states 9").code, 2);
  EXPECT_EQ(run("bounds --strategy greedy").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(CliFiles, CorruptedBasisFileExitsTwo) {
  std::ofstream(path("truncated.json")) << "{\"dim\": 2, \"unitaries\": [[[1, 0]";
  std::ofstream(path("short.json")) << R"({"dim": 2, "unitaries": [[[1,0],[0,0],[0,0],[1,0]]]})";
  std::ofstream(path("nonunitary.json"))
      << R"({"dim": 2, "unitaries": [[[1,0],[0,0],[0,0],[1,0]], [[2,0],[0,0],[0,0],[-1,0]],
             [[0,0],[1,0],[1,0],[0,0]], [[0,0],[-1,0],[1,0],[0,0]]]})";
  for (const char* f : {"truncated.json", "short.json", "nonunitary.json", "missing.json"}) {
    EXPECT_EQ(run("verify --dim 2 --basis-file " + path(f)).code, 2) << f;
  }
  EXPECT_EQ(run("basis --basis-file " + path("nonunitary.json")).code, 2);
}

TEST_F(CliFiles, BasisFileRoundTrip) {
  ASSERT_EQ(run("basis --dim 3 --random-basis --seed 4 --out " + path("b.json")).code, 0);
  const Json doc = Json::parse(slurp(path("b.json")));
  ASSERT_TRUE(doc["valid"].get<bool>());
  std::ofstream(path("basis_only.json")) << doc["basis"].dump();
  const Json v = run_json("verify --dim 3 --spectrum 0.5,0.3,0.2 --basis-file " + path("basis_only.json"));
  EXPECT_TRUE(v["passed"].get<bool>());
}

TEST_F(CliFiles, OutFileMatchesStdout) {
  const CliRun r = run("certificate --dim 2 --spectrum 0.8,0.2");
  ASSERT_EQ(r.code, 0);
  ASSERT_EQ(run("certificate --dim 2 --spectrum 0.8,0.2 --out " + path("c.json")).code, 0);
  EXPECT_EQ(slurp(path("c.json")), r.out);
}

TEST(CliVerify, QubitSuitePassesQuickly) {
  const CliRun r = run("verify --dim 2 --spectrum 0.8,0.2");
  EXPECT_EQ(r.code, 0);
  EXPECT_LT(r.seconds, 5.0);
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["checks"].size(), 9u);
}

TEST(CliVerify, QutritSuitePasses) {
  const CliRun r = run("verify --dim 3 --spectrum random --seed 11 --random-basis");
  EXPECT_EQ(r.code, 0);
  EXPECT_LT(r.seconds, 60.0);
  EXPECT_TRUE(Json::parse(r.out)["passed"].get<bool>());
}

TEST(CliVerify, EndpointsPass) {
  EXPECT_EQ(run("verify --dim 3 --spectrum product").code, 0);
  EXPECT_EQ(run("verify --dim 3 --spectrum uniform").code, 0);
}

TEST(CliCertificate, QubitReport) {
  const Json j = run_json("certificate --dim 2 --spectrum 0.8,0.2");
  EXPECT_NEAR(j["trace_value"].get<double>(), 0.9, 1e-12);
  EXPECT_TRUE(j["feasibility"]["passed"].get<bool>());
  EXPECT_TRUE(j["upsilon"]["passed"].get<bool>());
  const Json n = run_json("certificate --dim 3 --spectrum product --n-states 5");
  EXPECT_NEAR(n["trace_value"].get<double>(), 3.0 / 5.0, 1e-12);
}

TEST(CliProtocol, ValueAndSampling) {
  const Json j = run_json("protocol --dim 2 --spectrum 0.8,0.2 --shots 100000 --seed 3");
  EXPECT_NEAR(j["protocol"]["success"].get<double>(), 0.9, 1e-10);
  EXPECT_NEAR(j["sampled"]["frequency"].get<double>(), 0.9, 1e-2);
}

TEST(CliBounds, ThreeBellStatesAndStrategies) {
  const Json j = run_json("bounds --dim 2 --spectrum 0.8,0.2 --n-states 3");
  EXPECT_NEAR(j["bounds"]["lower"].get<double>(), 2.0 / 3.0 * 1.4, 1e-10);
  EXPECT_NEAR(j["bounds"]["upper"].get<double>(), 1.0, 1e-15);
  const Json p = run_json("bounds --dim 2 --spectrum 0.8,0.2 --n-states 3 --strategy projector");
  EXPECT_EQ(p["bounds"]["strategy"], "projector");
  const Json w = run_json("bounds --dim 3 --spectrum uniform --n-states 2");
  EXPECT_FALSE(w["bounds"]["in_bounded_regime"].get<bool>());
  EXPECT_TRUE(w["bounds"].contains("warning"));
}

TEST(CliSdp, QubitSolve) {
  const Json j = run_json("sdp --dim 2 --spectrum 0.8,0.2");
  EXPECT_NEAR(j["result"]["primal_value"].get<double>(), 0.9, 1e-3);
  EXPECT_TRUE(j["result"]["converged"].get<bool>());
  const Json capped = run_json("sdp --dim 2 --spectrum 0.8,0.2 --max-iters 10 --accuracy 1e-9");
  EXPECT_FALSE(capped["result"]["converged"].get<bool>());
}

TEST(CliSandwich, QubitFullBasis) {
  const Json j = run_json("sandwich --dim 2 --spectrum 0.8,0.2");
  EXPECT_NEAR(j["lower"].get<double>(), 0.9, 1e-10);
  EXPECT_NEAR(j["sdp"].get<double>(), 0.9, 1e-3);
  EXPECT_NEAR(j["upper"].get<double>(), 0.9, 1e-12);
  EXPECT_TRUE(j["agree"].get<bool>());
}

TEST(CliSandwich, QubitThreeStates) {
  const Json j = run_json("sandwich --dim 2 --spectrum 0.8,0.2 --n-states 3");
  EXPECT_NEAR(j["lower"].get<double>(), 2.0 / 3.0 * 1.4, 1e-10);
  EXPECT_NEAR(j["upper_clipped"].get<double>(), 1.0, 1e-15);
  EXPECT_NEAR(j["upper"].get<double>(), 4.0 / 3.0 * 0.9, 1e-12);
  EXPECT_TRUE(j["ordered"].get<bool>());
}

TEST(CliSandwich, QutritRandomSpectrumAgrees) {
  const Json j = run_json("sandwich --dim 3 --spectrum random --seed 9");
  EXPECT_TRUE(j["agree"].get<bool>());
  EXPECT_NEAR(j["lower"].get<double>(), j["upper"].get<double>(), 1e-10);
  EXPECT_NEAR(j["sdp"].get<double>(), j["fef"].get<double>(), 2e-3);
}

TEST(CliDeterminism, ByteIdenticalOutput) {
  for (const char* args : {"sandwich --dim 2 --spectrum random --seed 17 --n-states 3",
                           "verify --dim 3 --spectrum random --seed 5 --random-basis",
                           "protocol --dim 3 --sweep 4 --seed 2 --csv"}) {
    const CliRun a = run(args);
    const CliRun b = run(args);
    ASSERT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
  const CliRun one = run("sdp --dim 2 --spectrum 0.7,0.3", "ENTDIST_THREADS=1");
  const CliRun many = run("sdp --dim 2 --spectrum 0.7,0.3", "ENTDIST_THREADS=4");
  EXPECT_EQ(one.out, many.out);
}
