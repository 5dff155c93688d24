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


#include "mdlxf/experiments.h"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mdlxf/common.h"

namespace mdlxf::experiments {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Field(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(10);
  s << *v;
  return s.str();
}

nlohmann::json Opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<train::Matrix> WeightArrays(const transformer::TransformerWeights& w) {
  std::vector<train::Matrix> out;
  for (const auto& n : transformer::TransformerWeights::ArrayNames())
    out.push_back(w.Array(n));
  return out;
}

transformer::TransformerWeights FromArrays(
    const transformer::ModelConfig& config,
    const std::vector<train::Matrix>& arrays) {
  auto w = transformer::TransformerWeights::Zeros(config);
  const auto& names = transformer::TransformerWeights::ArrayNames();
  for (std::size_t i = 0; i < names.size(); ++i) w.Array(names[i]) = arrays[i];
  return w;
}

void Log(std::ostream* log, const ResultsRow& r) {
  if (!log) return;
  *log << r.init << "/" << r.objective;
  if (r.kl_coefficient) *log << " coef " << *r.kl_coefficient;
  if (r.kl_bits) *log << " kl " << *r.kl_bits;
  *log << " nll " << r.nll_bits << " acc " << r.train_acc;
  if (r.ood_acc) *log << " ood " << *r.ood_acc;
  *log << " (" << r.seconds << " s)";
  if (!r.error.empty()) *log << " error: " << r.error;
  *log << std::endl;
}

ResultsRow MakeRow(std::string init, std::string objective) {
  ResultsRow row;
  row.init = std::move(init);
  row.objective = std::move(objective);
  return row;
}

void FillVariational(ResultsRow& row, const codes::CodelengthReport& rep) {
  row.kl_bits = rep.kl_bits;
  row.nll_bits = rep.nll_bits;
  row.codelength_bits = rep.variational_bits();
  row.prior_cost_bits = rep.prior_cost_bits;
  row.train_acc = rep.train_acc;
}

}  // namespace

std::string ResultsTable::ToCsv() const {
  std::ostringstream s;
  s << "init,objective,kl_coefficient,kl_bits,nll_bits,codelength_bits,"
       "prior_cost_bits,train_acc,ood_acc,seconds,error\n";
  for (const auto& r : rows) {
    s << r.init << ',' << r.objective << ',' << Field(r.kl_coefficient) << ','
      << Field(r.kl_bits) << ',' << Field(r.nll_bits) << ','
      << Field(r.codelength_bits) << ',' << Field(r.prior_cost_bits) << ','
      << Field(r.train_acc) << ',' << Field(r.ood_acc) << ','
      << Field(r.seconds) << ',' << CsvQuote(r.error) << '\n';
  }
  return s.str();
}

nlohmann::json ResultsTable::ToJson() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"init", r.init},
                         {"objective", r.objective},
                         {"kl_coefficient", Opt(r.kl_coefficient)},
                         {"kl_bits", Opt(r.kl_bits)},
                         {"nll_bits", r.nll_bits},
                         {"codelength_bits", Opt(r.codelength_bits)},
                         {"prior_cost_bits", r.prior_cost_bits},
                         {"train_acc", r.train_acc},
                         {"ood_acc", Opt(r.ood_acc)},
                         {"seconds", r.seconds},
                         {"diverged", r.diverged},
                         {"error", r.error}});
  }
  return {{"name", name}, {"rows", rows_json}, {"metadata", metadata}};
}

bool ResultsTable::HasErrors() const {
  for (const auto& r : rows)
    if (r.diverged || !r.error.empty()) return true;
  return false;
}

Scale ParseScale(const std::string& s) {
  if (s == "desk") return Scale::kDesk;
  if (s == "full") return Scale::kFull;
  throw ValidationError("scale must be desk or full, got '" + s + "'");
}

Table1Preset PresetFor(Scale scale) {
  Table1Preset p;
  p.mle.lr = 1e-3;
  p.mle.warmup_steps = 1000;
  p.mle.total_steps = 50000;
  p.mle.log_every = 500;
  p.variational = p.mle;
  p.variational.kl_coefficient = 1e-3;
  if (scale == Scale::kFull) return p;
  p.train_max_len = 10;
  p.train_count = 10000;
  p.ood_min_len = 11;
  p.ood_max_len = 16;
  p.model.model_dim = 16;
  p.model.hidden_dim = 32;
  p.model.num_heads = 2;
  p.model.num_prompts = 4;
  p.model.num_layers = 18;
  p.mle.lr = 5e-4;
  p.mle.warmup_steps = 500;
  p.mle.final_lr_fraction = 0.2;
  p.mle.total_steps = 5000;
  p.mle.log_every = 100;
  const double kl = p.variational.kl_coefficient;
  p.variational = p.mle;
  p.variational.kl_coefficient = kl;
  return p;
}

ResultsTable ReproduceTable1(const Table1Preset& preset, std::uint64_t seed,
                             std::ostream* log) {
  ResultsTable table;
  table.name = "table1";
  const auto train_set = tasks::GenParity(preset.train_min_len,
                                          preset.train_max_len,
                                          preset.train_count, seed);
  const auto ood_set = tasks::GenParityPerLength(
      preset.ood_min_len, preset.ood_max_len, preset.ood_per_length, seed + 1);
  const auto config = tasks::MakeParityConfig(preset.model);
  const train::ParityObjective objective(config, train_set);
  table.metadata = {{"seed", seed},
                    {"train_lengths", {preset.train_min_len, preset.train_max_len}},
                    {"train_count", preset.train_count},
                    {"ood_lengths", {preset.ood_min_len, preset.ood_max_len}},
                    {"ood_per_length", preset.ood_per_length},
                    {"model_dim", preset.model.model_dim},
                    {"hidden_dim", preset.model.hidden_dim},
                    {"num_heads", preset.model.num_heads},
                    {"num_prompts", preset.model.num_prompts},
                    {"num_layers", preset.model.num_layers},
                    {"steps", preset.mle.total_steps}};

  {
    ResultsRow row = MakeRow("random", "mle");
    const auto t0 = Clock::now();
    auto cfg = preset.mle;
    cfg.seed = seed;
    auto r = train::TrainMle(objective,
                             WeightArrays(tasks::RandomTransformerWeights(config, seed)),
                             cfg);
    row.nll_bits = r.report.nll_bits;
    row.train_acc = r.report.train_acc;
    row.diverged = r.diverged;
    row.error = r.error;
    if (!r.diverged)
      row.ood_acc = tasks::EvaluateParity(FromArrays(config, r.weights), config,
                                          ood_set).accuracy;
    row.seconds = Since(t0);
    table.metadata["mle_trajectory"] = train::TrajectoryCsv(r.trajectory);
    Log(log, row);
    table.rows.push_back(row);
  }
  {
    ResultsRow row = MakeRow("random", "variational");
    const auto t0 = Clock::now();
    auto cfg = preset.variational;
    cfg.seed = seed;
    row.kl_coefficient = cfg.kl_coefficient;
    auto r = train::TrainVariational(
        objective, tasks::RandomTransformerBundle(config, seed), cfg);
    row.diverged = r.diverged;
    row.error = r.error;
    if (!r.diverged) {
      FillVariational(row, r.report);
      row.ood_acc = tasks::EvaluateParity(FromArrays(config, r.weights), config,
                                          ood_set).accuracy;
    }
    row.seconds = Since(t0);
    table.metadata["variational_trajectory"] = train::TrajectoryCsv(r.trajectory);
    Log(log, row);
    table.rows.push_back(row);
  }
  {
    ResultsRow row = MakeRow("manual", "variational");
    const auto t0 = Clock::now();
    try {
      const auto m = tasks::ManualParityBundle(preset.manual);
      const auto kl =
          codes::MonteCarloKl(m.bundle, preset.manual_mc_samples, seed);
      const auto tr = tasks::EvaluateParity(m.pruned_weights, m.pruned_config,
                                            train_set);
      const auto ood = tasks::EvaluateParity(m.pruned_weights, m.pruned_config,
                                             ood_set);
      FillVariational(row, codes::MakeReport(m.bundle.PriorCostBits(), kl,
                                             tr.nll_bits, tr.accuracy));
      row.ood_acc = ood.accuracy;
      table.metadata["manual_kl_stderr_bits"] = kl.stderr_bits;
      table.metadata["manual_weights"] = m.bundle.size();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.seconds = Since(t0);
    Log(log, row);
    table.rows.push_back(row);
  }
  return table;
}

Table2Options::Table2Options() {
  train.lr = 1e-2;
  train.warmup_steps = 1000;
  train.total_steps = 1000;
  train.log_every = 100;
}

ResultsTable ReproduceTable2(const Table2Options& options, std::uint64_t seed,
                             std::ostream* log) {
  ResultsTable table;
  table.name = "table2";
  const train::MlpIdentityObjective objective(tasks::GenIdentity());
  table.metadata = {{"seed", seed},
                    {"lr", options.train.lr},
                    {"warmup_steps", options.train.warmup_steps},
                    {"steps", options.train.total_steps},
                    {"examples", objective.NumExamples()}};
  auto cfg = options.train;
  cfg.seed = seed;

  {
    ResultsRow row = MakeRow("random", "mle");
    const auto t0 = Clock::now();
    const auto w = tasks::RandomMlpWeights(seed);
    std::vector<train::Matrix> arrays;
    for (const auto& n : tasks::MlpWeights::ArrayNames()) arrays.push_back(w.Array(n));
    auto r = train::TrainMle(objective, arrays, cfg);
    row.nll_bits = r.report.nll_bits;
    row.train_acc = r.report.train_acc;
    row.diverged = r.diverged;
    row.error = r.error;
    row.seconds = Since(t0);
    Log(log, row);
    table.rows.push_back(row);
  }
  auto variational = [&](std::string init, codes::DistributionBundle bundle,
                         double coef) {
    ResultsRow row = MakeRow(std::move(init), "variational");
    const auto t0 = Clock::now();
    row.kl_coefficient = coef;
    auto c = cfg;
    c.kl_coefficient = coef;
    auto r = train::TrainVariational(objective, std::move(bundle), c);
    row.diverged = r.diverged;
    row.error = r.error;
    if (!r.diverged) FillVariational(row, r.report);
    row.seconds = Since(t0);
    Log(log, row);
    table.rows.push_back(row);
  };
  for (double coef : options.coefficients)
    variational("random", tasks::RandomMlpBundle(seed), coef);
  const auto manual = tasks::MlpManualBundle();
  const auto untrained = train::EvaluateBundle(objective, manual,
                                               cfg.eval_mc_samples,
                                               cfg.eval_nll_samples, seed);
  table.metadata["manual_untrained_codelength_bits"] =
      untrained.variational_bits();
  variational("manual", manual, options.manual_coefficient);
  return table;
}

std::string FrontierCsv(bool multimodal, const codes::FrontierGrid& grid) {
  const auto pts = codes::FrontierSweep(multimodal, grid);
  const auto env = codes::FrontierEnvelope(pts);
  std::ostringstream s;
  s.precision(12);
  s << "mu,var,decode_probability,kl_bits,on_envelope\n";
  for (const auto& p : pts) {
    bool on = false;
    for (const auto& e : env) on |= e.mu == p.mu && e.var == p.var;
    s << p.mu << ',' << p.var << ',' << p.probability << ',' << p.kl_bits << ','
      << (on ? 1 : 0) << '\n';
  }
  return s.str();
}

}  // namespace mdlxf::experiments
