/*
 * Copyright 2026 The KAN-MCP Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <sstream>

#include "../../tools/cli.hpp"
#include "support.hpp"
#include "svg_parse.hpp"

namespace kanmcp::cli {
namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kanmcp");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    testing::spit(*dir_ / "spec.txt", "n = 150\nd_t = 4\nd_a = 3\nd_v = 5\nlabel = balanced\nseed = 2\n");
    testing::spit(*dir_ / "run.cfg", "epochs = 3\nmid_dim = 8\nbatch_size = 16\nseed = 7\n");
    ASSERT_EQ(run_cli({"synth", "--spec", path("spec.txt"), "--out", path("data")}).code, 0);
    const Result r = run_cli({"train", "--config", path("run.cfg"), "--data", path("data"), "--out", path("run")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::string path(const std::string& leaf) { return (*dir_ / leaf).string(); }

  static testing::TempDir* dir_;
};

testing::TempDir* CliPipeline::dir_ = nullptr;

TEST(ExitCodes, Classes) {
  EXPECT_EQ(exit_code(ErrorKind::ConfigError), 3);
  EXPECT_EQ(exit_code(ErrorKind::BadSpec), 3);
  EXPECT_EQ(exit_code(ErrorKind::MissingFile), 4);
  EXPECT_EQ(exit_code(ErrorKind::ParseError), 4);
  EXPECT_EQ(exit_code(ErrorKind::RowCountMismatch), 4);
  EXPECT_EQ(exit_code(ErrorKind::CorruptCheckpoint), 5);
  EXPECT_EQ(exit_code(ErrorKind::IoError), 6);
  EXPECT_EQ(exit_code(ErrorKind::DomainError), 1);
}

TEST(Usage, BadInvocations) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  const Result r = run_cli({"train", "--config"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("UsageError", 0), 0u) << r.err;
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliPipeline, TrainWritesEveryArtifact) {
  for (const char* f : {"checkpoint.kmcp", "metrics.txt", "metrics.json", "loss_history.csv", "pareto_log.csv",
                        "loss_curves.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(*dir_ / "run" / f)) << f;
  }
  const std::string metrics = testing::slurp(*dir_ / "run" / "metrics.txt");
  EXPECT_NE(metrics.find("epoch.3.train.multi="), std::string::npos);
  EXPECT_NE(metrics.find("test.acc2="), std::string::npos);
  EXPECT_EQ(testing::slurp(*dir_ / "run" / "loss_history.csv").rfind("epoch,multi,t,a,v\n", 0), 0u);
  EXPECT_EQ(testing::slurp(*dir_ / "run" / "pareto_log.csv").rfind("step,group,cos_beta,alpha_m,lambda,conflict\n", 0), 0u);
  EXPECT_EQ(testing::parse_polylines(testing::slurp(*dir_ / "run" / "loss_curves.svg")).size(), 4u);
}

TEST_F(CliPipeline, EvalReproducesTheTestMetrics) {
  const Result r = run_cli({"eval", "--checkpoint", path("run/checkpoint.kmcp"), "--data", path("data"), "--workers",
                            "3", "--report", path("eval.txt"), "--json", path("eval.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string metrics = testing::slurp(*dir_ / "run" / "metrics.txt");
  std::istringstream lines(r.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("test.", 0) != 0) continue;
    EXPECT_NE(metrics.find(line + "\n"), std::string::npos) << line;
    ++n;
  }
  EXPECT_GE(n, 7u);
  EXPECT_FALSE(testing::slurp(*dir_ / "eval.json").empty());
}

TEST_F(CliPipeline, VizFormats) {
  ASSERT_EQ(run_cli({"viz", "--checkpoint", path("run/checkpoint.kmcp"), "--data", path("data"), "--out",
                     path("g.svg"), "--edges", path("edges")})
                .code,
            0);
  EXPECT_EQ(testing::parse_svg_edges(testing::slurp(*dir_ / "g.svg")).size(), 40u);
  EXPECT_TRUE(std::filesystem::exists(*dir_ / "edges"));
  ASSERT_EQ(run_cli({"viz", "--checkpoint", path("run/checkpoint.kmcp"), "--data", path("data"), "--out",
                     path("g.dot")})
                .code,
            0);
  EXPECT_EQ(testing::parse_dot_edges(testing::slurp(*dir_ / "g.dot")).size(), 40u);
  const Result png = run_cli({"viz", "--checkpoint", path("run/checkpoint.kmcp"), "--data", path("data"), "--out",
                              path("g.png")});
  EXPECT_EQ(png.code, 2);
  EXPECT_NE(png.err.find(".svg"), std::string::npos);
  EXPECT_NE(png.err.find(".dot"), std::string::npos);
}

TEST_F(CliPipeline, ParetoSummary) {
  const Result r = run_cli({"pareto", "--log", path("run/pareto_log.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("enc.t.mu.fc1"), std::string::npos) << r.out;
}

TEST_F(CliPipeline, TrainingIsByteDeterministic) {
  ASSERT_EQ(run_cli({"train", "--config", path("run.cfg"), "--data", path("data"), "--out", path("again")}).code, 0);
  for (const char* f : {"checkpoint.kmcp", "metrics.txt", "metrics.json", "loss_history.csv", "pareto_log.csv",
                        "loss_curves.svg"}) {
    EXPECT_EQ(testing::slurp(*dir_ / "run" / f), testing::slurp(*dir_ / "again" / f)) << f;
  }
}

TEST_F(CliPipeline, ParetoToggleIsRecorded) {
  ASSERT_EQ(run_cli({"train", "--config", path("run.cfg"), "--data", path("data"), "--out", path("off"),
                     "--mcpareto", "off"})
                .code,
            0);
  EXPECT_NE(testing::slurp(*dir_ / "off" / "checkpoint.kmcp"), testing::slurp(*dir_ / "run" / "checkpoint.kmcp"));
  EXPECT_EQ(run_cli({"train", "--config", path("run.cfg"), "--data", path("data"), "--out", path("x"), "--mcpareto",
                     "sometimes"})
                .code,
            2);
}

TEST_F(CliPipeline, ErrorClasses) {
  testing::spit(*dir_ / "bad.cfg", "beta = -1\n");
  const Result cfg = run_cli({"train", "--config", path("bad.cfg"), "--data", path("data"), "--out", path("y")});
  EXPECT_EQ(cfg.code, 3);
  EXPECT_EQ(cfg.err.rfind("ConfigError", 0), 0u) << cfg.err;
  EXPECT_EQ(run_cli({"train", "--config", path("run.cfg"), "--data", path("nowhere"), "--out", path("y")}).code, 4);
  testing::spit(*dir_ / "bad.spec", "label = loud\n");
  EXPECT_EQ(run_cli({"synth", "--spec", path("bad.spec"), "--out", path("z")}).code, 3);
  testing::spit(*dir_ / "broken.kmcp", "KMCP garbage");
  EXPECT_EQ(run_cli({"eval", "--checkpoint", path("broken.kmcp"), "--data", path("data")}).code, 5);
  EXPECT_EQ(run_cli({"eval", "--checkpoint", path("run/checkpoint.kmcp"), "--data", path("data"), "--split", "dev"})
                .code,
            2);
  testing::spit(*dir_ / "plainfile", "x");
  EXPECT_EQ(run_cli({"train", "--config", path("run.cfg"), "--data", path("data"), "--out", path("plainfile/sub")})
                .code,
            6);
}

}  // namespace
}  // namespace kanmcp::cli
