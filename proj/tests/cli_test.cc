// Copyright 2026 The mdlxf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.h"
#include "mdlxf/codes.h"
#include "mdlxf/experiments.h"
#include "mdlxf/tasks.h"
#include "mdlxf/weights_io.h"

namespace mdlxf {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mdlxf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::Main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path TempDir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mdlxf_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(CliTest, FrontierEmitsCsv) {
  const auto r = Cli({"frontier", "--prior", "multimodal", "--mu-steps", "5",
                      "--var-steps", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream s(r.out);
  std::string header, line;
  std::getline(s, header);
  EXPECT_EQ(header, "mu,var,decode_probability,kl_bits,on_envelope");
  int rows = 0;
  while (std::getline(s, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
  }
  EXPECT_EQ(rows, 20);
}

TEST(CliTest, EnumBoundsKraft) {
  const auto dir = TempDir("enum");
  fs::create_directories(dir);
  {
    std::ofstream d(dir / "data.txt");
    d << "0\t0\n1\t1\n01\t1\n";
  }
  const auto r = Cli({"enum-bounds", "--tm", "sign_bit", "--rt", "20", "--rs",
                      "8", "--max-len", "6", "--dataset",
                      (dir / "data.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(j.at("kraft_sum").get<double>(), 1.0);
  EXPECT_LE(j.at("c_bayes_bounded").get<double>(),
            j.at("c_two_part").get<double>());
}

TEST(CliTest, CompileForwardAndConfigReplay) {
  const auto a = TempDir("compile_a");
  const auto b = TempDir("compile_b");
  ASSERT_EQ(Cli({"compile", "--program", "parity", "--out", a.string()}).code, 0);
  EXPECT_TRUE(fs::exists(a / "model.json"));
  EXPECT_TRUE(fs::exists(a / "seed"));
  EXPECT_FALSE(fs::exists(a / ".lock"));
  const auto f = Cli({"forward", "--weights", (a / "model.json").string(),
                      "--input", "0111", "--input", "0110"});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto j = nlohmann::json::parse(f.out);
  EXPECT_EQ(j[0]["argmax"], 1);
  EXPECT_EQ(j[1]["argmax"], 0);
  ASSERT_EQ(Cli({"--config", (a / "config.ini").string(), "--out", b.string()})
                .code,
            0);
  EXPECT_EQ(Slurp(a / "model.json"), Slurp(b / "model.json"));
}

TEST(CliTest, LockedRunDirectoryIsRefused) {
  const auto a = TempDir("locked");
  fs::create_directories(a);
  std::ofstream(a / ".lock").put('x');
  const auto r = Cli({"compile", "--out", a.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("in use"), std::string::npos);
}

TEST(CliTest, MalformedConfigNamesTheField) {
  const auto a = TempDir("badcfg");
  fs::create_directories(a);
  {
    std::ofstream c(a / "c.ini");
    c << "[train]\nsteps=\"many\"\n";
  }
  const auto r = Cli({"--config", (a / "c.ini").string(), "train"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("steps"), std::string::npos) << r.err;
}

TEST(CliTest, ZmapAgreesWithMachine) {
  const auto r = Cli({"zmap", "--tm", "count_ones", "--z", "110", "--input",
                      "0110", "--input", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  for (const auto& p : j["probes"])
    EXPECT_NEAR(p["readout"].get<double>(), p["machine"].get<double>(), 1e-4);
}

TEST(CliTest, TrainIsBitwiseReproducible) {
  const auto a = TempDir("train_a");
  const auto b = TempDir("train_b");
  const std::vector<std::string> args = {
      "--seed", "5", "train", "--task", "identity", "--steps", "30",
      "--warmup", "10", "--lr", "1e-2", "--eval-mc-samples", "5", "--log-every",
      "10"};
  auto with = [&](const fs::path& d) {
    auto v = args;
    v.push_back("--out");
    v.push_back(d.string());
    return v;
  };
  ASSERT_EQ(Cli(with(a)).code, 0);
  ASSERT_EQ(Cli({"--config", (a / "config.ini").string(), "--out", b.string()})
                .code,
            0);
  EXPECT_EQ(Slurp(a / "trajectory.csv"), Slurp(b / "trajectory.csv"));
  EXPECT_EQ(Slurp(a / "bundle.json"), Slurp(b / "bundle.json"));
  EXPECT_EQ(Slurp(a / "report.json"), Slurp(b / "report.json"));
}

TEST(CliTest, EvalCodelengthOnCompiledParity) {
  const auto a = TempDir("eval");
  ASSERT_EQ(Cli({"compile", "--program", "parity", "--out", a.string()}).code, 0);
  const auto loaded = weights_io::Load((a / "model.json").string());
  const auto bundle = codes::DeltaPosteriorBundle(loaded.weights, loaded.config);
  {
    std::ofstream b(a / "bundle.json");
    b << codes::BundleToJson(bundle).dump();
    std::ofstream d(a / "data.txt");
    tasks::WriteParity(d, tasks::GenParity(1, 8, 50, 1));
  }
  const auto r = Cli({"eval-codelength", "--weights",
                      (a / "model.json").string(), "--bundle",
                      (a / "bundle.json").string(), "--dataset",
                      (a / "data.txt").string(), "--mc-samples", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("train_acc").get<double>(), 1.0);
  EXPECT_NEAR(j.at("total_bits").get<double>(),
              j.at("prior_cost_bits").get<double>() +
                  j.at("kl_bits").get<double>() + j.at("nll_bits").get<double>(),
              1e-9);
}

TEST(CliTest, UsageErrors) {
  EXPECT_NE(Cli({}).code, 0);
  EXPECT_NE(Cli({"frontier", "--prior", "bimodal"}).code, 0);
  EXPECT_NE(Cli({"no-such-command"}).code, 0);
}

TEST(ExperimentsTest, Table2RowsAndColumns) {
  const auto t = experiments::ReproduceTable2({}, 1);
  ASSERT_EQ(t.rows.size(), 7u);
  EXPECT_EQ(t.rows[0].objective, "mle");
  EXPECT_EQ(t.rows.back().init, "manual");
  for (const auto& r : t.rows) {
    EXPECT_FALSE(r.diverged) << r.error;
    if (r.kl_bits)
      EXPECT_NEAR(*r.codelength_bits, *r.kl_bits + r.nll_bits, 1e-9);
  }
  const auto csv = t.ToCsv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  EXPECT_EQ(t.ToJson()["rows"].size(), 7u);
}

TEST(ExperimentsTest, Table1TinyPreset) {
  auto p = experiments::PresetFor(experiments::Scale::kDesk);
  p.train_count = 60;
  p.ood_per_length = 5;
  p.model.model_dim = 8;
  p.model.hidden_dim = 8;
  p.model.num_layers = 4;
  p.model.num_prompts = 2;
  p.mle.total_steps = p.variational.total_steps = 5;
  p.mle.warmup_steps = p.variational.warmup_steps = 2;
  p.mle.batch = p.variational.batch = 8;
  p.variational.eval_mc_samples = 2;
  p.manual_mc_samples = 2;
  const auto t = experiments::ReproduceTable1(p, 2);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_FALSE(t.HasErrors()) << t.ToCsv();
  EXPECT_FALSE(t.rows[0].kl_bits.has_value());
  EXPECT_EQ(t.rows[2].init, "manual");
  EXPECT_EQ(t.rows[2].train_acc, 1.0);
  EXPECT_EQ(*t.rows[2].ood_acc, 1.0);
  EXPECT_GT(*t.rows[2].kl_bits, 1000);
}

TEST(ExperimentsTest, FrontierCsvFlagsEnvelope) {
  codes::FrontierGrid g;
  g.mu_steps = 7;
  g.var_steps = 7;
  const auto csv = experiments::FrontierCsv(false, g);
  EXPECT_NE(csv.find(",1\n"), std::string::npos);
}

}  // namespace
}  // namespace mdlxf
