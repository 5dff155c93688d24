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


#ifndef MDLXF_EXPERIMENTS_H_
#define MDLXF_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdlxf/codes.h"
#include "mdlxf/tasks.h"
#include "mdlxf/train.h"

// Result-table reproductions and frontier data.
namespace mdlxf::experiments {

struct ResultsRow {
  std::string init;       // random | manual
  std::string objective;  // mle | variational
  std::optional<double> kl_coefficient;
  std::optional<double> kl_bits;
  double nll_bits = 0;  // summed over the training set
  std::optional<double> codelength_bits;  // kl + nll
  double prior_cost_bits = 0;
  double train_acc = 0;
  std::optional<double> ood_acc;
  double seconds = 0;
  bool diverged = false;
  std::string error;
};

struct ResultsTable {
  std::string name;
  std::vector<ResultsRow> rows;
  nlohmann::json metadata;

  // Header: init,objective,kl_coefficient,kl_bits,nll_bits,codelength_bits,
  // prior_cost_bits,train_acc,ood_acc,seconds,error. Missing values are
  // empty fields.
  std::string ToCsv() const;
  nlohmann::json ToJson() const;
  bool HasErrors() const;
};

enum class Scale { kDesk, kFull };
Scale ParseScale(const std::string& s);

struct Table1Preset {
  int train_min_len = 1, train_max_len = 20, train_count = 100000;
  int ood_min_len = 21, ood_max_len = 40, ood_per_length = 1000;
  tasks::RandomModelConfig model;
  train::TrainConfig mle;
  train::TrainConfig variational;
  tasks::ManualParityConfig manual;
  int manual_mc_samples = 100;
};

Table1Preset PresetFor(Scale scale);

// Rows: random/MLE, random/variational, manual/variational. The manual row
// needs no training; its NLL and accuracies are computed with the pruned
// copy of the posterior means. A row whose training diverges keeps its
// error text and the table continues.
ResultsTable ReproduceTable1(const Table1Preset& preset, std::uint64_t seed,
                             std::ostream* log = nullptr);

struct Table2Options {
  std::vector<double> coefficients = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  double manual_coefficient = 1e-2;
  train::TrainConfig train;  // shared by every row; kl_coefficient per row
  Table2Options();
};

// Rows: random/MLE, one random/variational row per coefficient, then the
// trained manual row.
ResultsTable ReproduceTable2(const Table2Options& options, std::uint64_t seed,
                             std::ostream* log = nullptr);

// Columns: mu,var,decode_probability,kl_bits,on_envelope.
std::string FrontierCsv(bool multimodal, const codes::FrontierGrid& grid);

}  // namespace mdlxf::experiments

#endif  // MDLXF_EXPERIMENTS_H_
