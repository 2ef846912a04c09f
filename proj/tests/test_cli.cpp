// Copyright 2026 The qpd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code = -1;
  std::string out;
};

Invocation run(const std::string& args) {
  const std::string cmd = std::string(QPD_CLI) + " " + args + " 2>&1";
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qpd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(Cli, VerifyPassesAndWritesCalibration) {
  const fs::path cal = dir_ / "cal.json";
  const Invocation r = run("verify --calibration-out " + cal.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("verification passed"), std::string::npos);
  EXPECT_NE(r.out.find("postselection probability 0.25"), std::string::npos);
  const auto file = nlohmann::json::parse(slurp(cal));
  EXPECT_GE(file["matched"].get<int>(), 1);
  EXPECT_TRUE(file["verified"].get<bool>());
  EXPECT_EQ(file["patterns"].size(), 10u);
}

TEST_F(Cli, CorruptedBoxFailsVerification) {
  const Invocation r = run("verify --corrupt-box --calibration-out " + (dir_ / "cal.json").string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("FAIL pattern "), std::string::npos) << r.out;
}

TEST_F(Cli, SurfaceCsvIsDeterministic) {
  const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv";
  ASSERT_EQ(run("surface --steps 41 --variant entangled --out " + a.string()).code, 0);
  ASSERT_EQ(run("surface --steps 41 --variant entangled --out " + b.string()).code, 0);
  const std::string text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 41 * 41 + 1);
  EXPECT_NE(text.find("\n1,1,3,3\n"), std::string::npos);
}

TEST_F(Cli, SurfaceRejectsBadSteps) {
  EXPECT_NE(run("surface --steps 1").code, 0);
  EXPECT_NE(run("surface --steps 5 --out /nonexistent/dir/x.csv").code, 0);
}

TEST_F(Cli, PlayBackends) {
  Invocation r = run("play --a c --b d --variant classical_limit");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["payoffs"]["a"].get<double>(), 0, 1e-12);
  EXPECT_NEAR(j["payoffs"]["b"].get<double>(), 5, 1e-12);

  r = run("play --a d --b d --backend box --shots 8 --seed 2");
  ASSERT_EQ(r.code, 0) << r.out;
  j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["postselection_probability"].get<double>(), 0.25, 1e-9);
  EXPECT_EQ(j["sampled_outcomes"].size(), 8u);

  EXPECT_NE(run("play --a q --b d --backend wafer").code, 0);
}

TEST_F(Cli, NashOnGrid) {
  const Invocation r = run("nash --steps 41 --variant entangled");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "p_a,p_b,payoff_a,payoff_b\n1,1,3,3\n");
}

TEST_F(Cli, NoiseCsv) {
  const Invocation r = run("noise --profile d,d --sigmas 0:1.2:0.3 --method quadrature --samples 32");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sigma,gap_a,stderr_a,negativity");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
  const Invocation mc1 = run("noise --sigmas 0.6 --method monte_carlo --samples 3000 --seed 5 --workers 1");
  const Invocation mc4 = run("noise --sigmas 0.6 --method monte_carlo --samples 3000 --seed 5 --workers 4");
  EXPECT_EQ(mc1.out, mc4.out);
}

TEST_F(Cli, MixedCsvAndThreshold) {
  Invocation r = run("mixed --x 0.35");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "x,payoff_a,payoff_b,ppt\n0.35,2.5275,2.5275,true\n");
  r = run("mixed --threshold");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("x_star,0.29", 0), 0u) << r.out;
  EXPECT_NE(run("mixed --x 0.9").code, 0);
}

}  // namespace
