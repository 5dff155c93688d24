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


#include "cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mdlxf/codes.h"
#include "mdlxf/compile.h"
#include "mdlxf/experiments.h"
#include "mdlxf/ptm.h"
#include "mdlxf/symprog.h"
#include "mdlxf/tasks.h"
#include "mdlxf/toys.h"
#include "mdlxf/train.h"
#include "mdlxf/transformer.h"
#include "mdlxf/vocab.h"
#include "mdlxf/weights_io.h"

namespace mdlxf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json ReadJson(const std::string& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

// Owns --out for one process. Holds a lock file until destroyed.
class RunDir {
 public:
  explicit RunDir(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) return;
    fs::create_directories(dir_);
    lock_ = fs::path(dir_) / ".lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    if (!f) {
      lock_.clear();
      throw ValidationError("run directory " + dir_ +
                            " is in use (remove .lock if stale)");
    }
    std::fclose(f);
  }
  ~RunDir() {
    if (!lock_.empty()) {
      std::error_code ec;
      fs::remove(lock_, ec);
    }
  }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  bool active() const { return !dir_.empty(); }
  fs::path Path(const std::string& name) const { return fs::path(dir_) / name; }
  void Write(const std::string& name, const std::string& text) const {
    if (active()) WriteFile(Path(name), text);
  }

 private:
  std::string dir_;
  fs::path lock_;
};

ptm::PrefixTMSpec LoadMachine(const std::string& arg) {
  for (const auto& [name, spec] : toys::PrefixMachines())
    if (name == arg) return spec;
  return ptm::SpecFromJson(ReadJson(arg));
}

// parity, parity:<prompts>, copy, tm:<single-tape toy>, or a JSON file.
symprog::SymbolicProgram LoadProgram(const std::string& arg) {
  if (arg == "parity") return symprog::BuildParityProgram();
  if (arg.rfind("parity:", 0) == 0)
    return symprog::BuildParityProgram(std::stoi(arg.substr(7)));
  if (arg == "copy") return symprog::BuildCopyProgram();
  if (arg.rfind("tm:", 0) == 0) {
    for (const auto& [name, m] : toys::TapeMachines())
      if ("tm:" + name == arg) return symprog::BuildSingleTapeTMProgram(m);
    throw ValidationError("unknown single-tape machine " + arg.substr(3));
  }
  return symprog::ProgramFromJson(ReadJson(arg));
}

json ValueJson(const symprog::Value& v) {
  if (v.is_int()) return v.num;
  return {{"num", v.num}, {"den", v.den}, {"value", v.ToDouble()}};
}

json VectorJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json LogitsJson(const std::vector<ptm::RationalLogit>& logits) {
  json out = json::array();
  for (const auto& l : logits)
    out.push_back({{"text", l.ToString()}, {"value", l.value()}});
  return out;
}

// Lines of tokens<TAB>label; tokens use TokensFromString.
std::vector<ptm::LabeledSequence> ReadLabeled(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<ptm::LabeledSequence> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError(path + ":" + std::to_string(n) + ": missing tab");
    ptm::LabeledSequence s;
    s.tokens = TokensFromString(line.substr(0, tab));
    try {
      s.label = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(n) + ": bad label");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<train::Matrix> Arrays(const transformer::TransformerWeights& w) {
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

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
};

struct CompileArgs {
  std::string program = "parity";
  std::string weights;
  int layers = 0;
  std::string normalization = "tanh";
  int model_dim = 0, hidden_dim = 0, heads = 0, head_dim = 0;
};

struct InterpretArgs {
  std::string program = "parity";
  std::string input;
  int layers = 0;
};

struct ForwardArgs {
  std::string weights;
  std::vector<std::string> inputs;
  int layers = -1;
};

struct MachineArgs {
  std::string tm;
  std::string z;
  std::int64_t rt = 30, rs = 24;
  std::vector<std::string> inputs;
  std::string weights;
};

struct EnumArgs {
  std::string tm;
  std::int64_t rt = 30, rs = 24;
  int max_len = 10;
  std::string dataset;
};

struct EvalArgs {
  std::string weights, bundle, dataset;
  int mc_samples = 100;
};

struct TrainArgs {
  std::string task = "parity";
  std::string objective = "variational";
  std::string init = "random";
  std::string scale = "desk";
  int model_dim = 0, hidden_dim = 0, heads = 0, prompts = 0, layers = 0;
  train::TrainConfig config;
};

struct TableArgs {
  std::string scale = "desk";
};

struct FrontierArgs {
  std::string prior = "multimodal";
  codes::FrontierGrid grid;
};

int RunCompile(const CompileArgs& a, const RunDir& dir, std::ostream& out) {
  compile::CompilerOptions opts;
  opts.num_layers = a.layers;
  opts.normalization = transformer::NormalizationFromString(a.normalization);
  if (a.model_dim || a.hidden_dim || a.heads || a.head_dim)
    opts.target = compile::TargetDims{a.model_dim, a.hidden_dim, a.heads,
                                      a.head_dim};
  const auto program = LoadProgram(a.program);
  const auto m = compile::Compile(program, opts);
  std::string path = a.weights;
  if (path.empty() && dir.active()) path = dir.Path("model.json").string();
  if (!path.empty())
    weights_io::Save(path, m.weights, m.config, {{"program", program.name}});
  json layout = json::array();
  for (const auto& s : m.layout)
    layout.push_back({{"name", s.name}, {"offset", s.offset}, {"width", s.width}});
  out << json{{"program", program.name},
              {"config", weights_io::ConfigToJson(m.config)},
              {"weights", m.weights.NumWeights()},
              {"rule_units", m.rule_units},
              {"layout", layout},
              {"saved_to", path}}
             .dump(2)
      << "\n";
  return 0;
}

int RunInterpret(const InterpretArgs& a, std::ostream& out) {
  const auto program = LoadProgram(a.program);
  const auto ids = program.vocab.Preprocess(TokensFromString(a.input));
  const int layers = a.layers > 0 ? a.layers : program.num_layers;
  const auto r = symprog::Interpret(program, ids, layers);
  json outputs = json::object();
  const auto values = r.Outputs(program);
  for (std::size_t i = 0; i < values.size(); ++i)
    outputs[program.outputs[i]] = ValueJson(values[i]);
  out << json{{"program", program.name},
              {"layers", layers},
              {"readout_position", r.readout_position},
              {"outputs", outputs},
              {"diagnostics", r.diagnostics}}
             .dump(2)
      << "\n";
  return r.diagnostics.empty() ? 0 : 1;
}

int RunForward(const ForwardArgs& a, std::ostream& out) {
  const auto loaded = weights_io::Load(a.weights);
  json rows = json::array();
  for (const auto& text : a.inputs) {
    const auto logits = transformer::MapInput(loaded.weights, loaded.config,
                                              TokensFromString(text), a.layers);
    Eigen::Index arg = 0;
    logits.maxCoeff(&arg);
    rows.push_back({{"input", text},
                    {"logits", VectorJson(logits)},
                    {"probs", VectorJson(transformer::Softmax(logits))},
                    {"argmax", arg}});
  }
  out << rows.dump(2) << "\n";
  return 0;
}

int RunZmap(const MachineArgs& a, const RunDir& dir, std::ostream& out) {
  const ptm::Machine tm(LoadMachine(a.tm));
  const ptm::ResourceBound bound{a.rt, a.rs};
  const auto z = ptm::ParseBits(a.z);
  const auto m = compile::Zmap(tm, bound, z);
  std::string path = a.weights;
  if (path.empty() && dir.active()) path = dir.Path("model.json").string();
  if (!path.empty())
    weights_io::Save(path, m.weights, m.config,
                     {{"z", a.z}, {"r_t", a.rt}, {"r_s", a.rs}});
  json probes = json::array();
  int mismatches = 0;
  for (const auto& text : a.inputs) {
    const auto x = TokensFromString(text);
    const double got = transformer::MapInput(m.weights, m.config, x)(0);
    const auto run = ptm::Run(tm, z, x, bound);
    json row = {{"input", text}, {"readout", got},
                {"status", ptm::RunStatusName(run.status)}};
    if (run.status == ptm::RunStatus::kHalted) {
      const double want = ptm::DecodeOutputTapes(run.output_tapes)[0].value();
      row["machine"] = want;
      if (std::abs(got - want) >= 1e-4) ++mismatches;
    }
    probes.push_back(row);
  }
  out << json{{"config", weights_io::ConfigToJson(m.config)},
              {"weights", m.weights.NumWeights()},
              {"probes", probes},
              {"saved_to", path}}
             .dump(2)
      << "\n";
  return mismatches == 0 ? 0 : 1;
}

int RunEmulate(const MachineArgs& a, std::ostream& out) {
  const ptm::Machine tm(LoadMachine(a.tm));
  const auto z = ptm::ParseBits(a.z);
  json rows = json::array();
  for (const auto& text : a.inputs.empty() ? std::vector<std::string>{""}
                                           : a.inputs) {
    const auto r = ptm::Run(tm, z, TokensFromString(text), {a.rt, a.rs});
    json row = {{"input", text},
                {"status", ptm::RunStatusName(r.status)},
                {"steps", r.steps},
                {"max_registers", r.max_registers},
                {"final_state", r.final_state},
                {"output_tapes", r.output_tapes}};
    if (r.status == ptm::RunStatus::kHalted) {
      try {
        row["logits"] = LogitsJson(ptm::DecodeOutputTapes(r.output_tapes));
      } catch (const ptm::DecodeError& e) {
        row["decode_error"] = e.what();
      }
    }
    rows.push_back(row);
  }
  out << rows.dump(2) << "\n";
  return 0;
}

int RunEnumBounds(const EnumArgs& a, const RunDir& dir, std::ostream& out) {
  const ptm::Machine tm(LoadMachine(a.tm));
  const auto data = ReadLabeled(a.dataset);
  const auto report =
      ptm::BoundedCodelengthOracles(tm, {a.rt, a.rs}, a.max_len, data);
  const std::string text = report.ToJson().dump(2) + "\n";
  dir.Write("report.json", text);
  out << text;
  return 0;
}

int RunEvalCodelength(const EvalArgs& a, const Globals& g, const RunDir& dir,
                      std::ostream& out) {
  const auto loaded = weights_io::Load(a.weights);
  const auto bundle = codes::BundleFromJson(ReadJson(a.bundle));
  bundle.Check();
  if (static_cast<Eigen::Index>(bundle.size()) !=
      codes::Flatten(loaded.weights).size())
    throw ValidationError("bundle has " + std::to_string(bundle.size()) +
                          " weights, model has " +
                          std::to_string(codes::Flatten(loaded.weights).size()));
  std::ifstream in(a.dataset);
  if (!in) throw FormatError("cannot open " + a.dataset);
  const auto data = tasks::ReadParity(in);
  const auto kl = codes::MonteCarloKl(bundle, a.mc_samples, g.seed);
  const auto e = tasks::EvaluateParity(loaded.weights, loaded.config, data);
  const auto report =
      codes::MakeReport(bundle.PriorCostBits(), kl, e.nll_bits, e.accuracy);
  const std::string text = report.ToJson().dump(2) + "\n";
  dir.Write("report.json", text);
  out << text;
  return 0;
}

int RunTrain(TrainArgs a, const Globals& g, const RunDir& dir,
             std::ostream& out, std::ostream& err) {
  a.config.seed = g.seed;
  const bool variational = a.objective == "variational";
  std::unique_ptr<train::Objective> objective;
  std::optional<codes::DistributionBundle> bundle;
  std::vector<train::Matrix> weights;
  std::optional<transformer::ModelConfig> parity_config;

  if (a.task == "identity") {
    objective = std::make_unique<train::MlpIdentityObjective>(tasks::GenIdentity());
    if (a.init == "manual") {
      bundle = tasks::MlpManualBundle();
    } else {
      bundle = tasks::RandomMlpBundle(g.seed);
    }
    weights = train::SplitFlat(bundle->Means(), bundle->blocks);
  } else {
    const auto preset = experiments::PresetFor(experiments::ParseScale(a.scale));
    auto data = tasks::GenParity(preset.train_min_len, preset.train_max_len,
                                 preset.train_count, g.seed);
    if (a.init == "manual") {
      auto m = tasks::ManualParityBundle(preset.manual);
      parity_config = m.config;
      bundle = std::move(m.bundle);
      weights = Arrays(m.weights);
    } else {
      auto rc = preset.model;
      if (a.model_dim) rc.model_dim = a.model_dim;
      if (a.hidden_dim) rc.hidden_dim = a.hidden_dim;
      if (a.heads) rc.num_heads = a.heads;
      if (a.prompts) rc.num_prompts = a.prompts;
      if (a.layers) rc.num_layers = a.layers;
      parity_config = tasks::MakeParityConfig(rc);
      bundle = tasks::RandomTransformerBundle(*parity_config, g.seed);
      weights = Arrays(tasks::RandomTransformerWeights(*parity_config, g.seed));
    }
    objective = std::make_unique<train::ParityObjective>(*parity_config,
                                                         std::move(data));
  }

  const auto result = variational
                          ? train::TrainVariational(*objective, *bundle, a.config)
                          : train::TrainMle(*objective, weights, a.config);
  dir.Write("trajectory.csv", train::TrajectoryCsv(result.trajectory));
  if (variational && dir.active())
    WriteFile(dir.Path("bundle.json"), codes::BundleToJson(result.bundle).dump());
  if (parity_config && dir.active())
    weights_io::Save(dir.Path("model.json").string(),
                     FromArrays(*parity_config, result.weights),
                     *parity_config);
  json report = result.report.ToJson();
  report["diverged"] = result.diverged;
  report["error"] = result.error;
  report["steps"] = a.config.total_steps;
  const std::string text = report.dump(2) + "\n";
  dir.Write("report.json", text);
  out << text;
  if (result.diverged) err << "training diverged: " << result.error << "\n";
  return result.diverged ? 1 : 0;
}

int RunTable(const experiments::ResultsTable& t, const RunDir& dir,
             std::ostream& out) {
  dir.Write(t.name + ".csv", t.ToCsv());
  dir.Write(t.name + ".json", t.ToJson().dump(2) + "\n");
  out << t.ToCsv();
  return t.HasErrors() ? 1 : 0;
}

int RunFrontier(const FrontierArgs& a, const RunDir& dir, std::ostream& out) {
  const std::string csv =
      experiments::FrontierCsv(a.prior == "multimodal", a.grid);
  dir.Write("frontier_" + a.prior + ".csv", csv);
  out << csv;
  return 0;
}

std::string Quote(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// The seed plus every option of the chosen subcommand that has a value, in
// a form --config reads back.
std::string RunConfig(const CLI::App& app, const Globals& g) {
  std::ostringstream s;
  s << "seed=" << g.seed << "\n";
  for (const CLI::App* sub : app.get_subcommands()) {
    s << "[" << sub->get_name() << "]\n";
    for (const CLI::Option* o : sub->get_options()) {
      if (o == sub->get_help_ptr()) continue;
      std::vector<std::string> vals =
          o->count() ? o->results()
                     : std::vector<std::string>{o->get_default_str()};
      if (vals.size() == 1 && vals[0].empty()) continue;
      s << o->get_single_name() << "=";
      if (vals.size() == 1) {
        s << Quote(vals[0]);
      } else {
        s << "[";
        for (std::size_t i = 0; i < vals.size(); ++i)
          s << (i ? "," : "") << Quote(vals[i]);
        s << "]";
      }
      s << "\n";
    }
  }
  return s.str();
}

void AddTrainOptions(CLI::App* sub, TrainArgs& a) {
  auto& c = a.config;
  sub->add_option("--task", a.task)->check(CLI::IsMember({"parity", "identity"}))
      ->capture_default_str();
  sub->add_option("--objective", a.objective)
      ->check(CLI::IsMember({"mle", "variational"}))->capture_default_str();
  sub->add_option("--init", a.init)->check(CLI::IsMember({"random", "manual"}))
      ->capture_default_str();
  sub->add_option("--scale", a.scale, "Parity data and model preset")
      ->check(CLI::IsMember({"desk", "full"}))->capture_default_str();
  sub->add_option("--model-dim", a.model_dim, "0 keeps the preset");
  sub->add_option("--hidden-dim", a.hidden_dim, "0 keeps the preset");
  sub->add_option("--heads", a.heads, "0 keeps the preset");
  sub->add_option("--prompts", a.prompts, "0 keeps the preset");
  sub->add_option("--layers", a.layers, "0 keeps the preset");
  sub->add_option("--lr", c.lr)->capture_default_str();
  sub->add_option("--warmup", c.warmup_steps)->capture_default_str();
  sub->add_option("--steps", c.total_steps)->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--final-lr-fraction", c.final_lr_fraction)->capture_default_str();
  sub->add_option("--batch", c.batch)->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--mc-weight-samples", c.mc_weight_samples)
      ->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--kl-coef", c.kl_coefficient)->capture_default_str();
  sub->add_option("--gumbel-temperature", c.gumbel_temperature)
      ->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--eval-mc-samples", c.eval_mc_samples)->capture_default_str();
  sub->add_option("--eval-nll-samples", c.eval_nll_samples)->capture_default_str();
  sub->add_option("--log-every", c.log_every)->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Compile, emulate and score Transformers by description length",
               "mdlxf"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data, initialization and sampling")
      ->capture_default_str();
  app.add_option("--out", g.out,
                 "Run directory; receives config.ini and result files");
  app.set_config("--config", "",
                 "key=value file; subcommand keys take a section header "
                 "such as [train]");

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "Compile a symbolic program");
  compile->add_option("--program", ca.program,
                      "parity, parity:<prompts>, copy, tm:<machine> or a JSON "
                      "file")->capture_default_str();
  compile->add_option("--weights", ca.weights, "Output weights file");
  compile->add_option("--layers", ca.layers, "0 uses the program's hint");
  compile->add_option("--normalization", ca.normalization)
      ->check(CLI::IsMember({"tanh", "none"}))->capture_default_str();
  compile->add_option("--model-dim", ca.model_dim, "Pad target; 0 keeps");
  compile->add_option("--hidden-dim", ca.hidden_dim, "Pad target; 0 keeps");
  compile->add_option("--heads", ca.heads, "Pad target; 0 keeps");
  compile->add_option("--head-dim", ca.head_dim, "Pad target; 0 keeps");

  InterpretArgs ia;
  auto* interpret = app.add_subcommand("interpret", "Run the symbolic interpreter");
  interpret->add_option("--program", ia.program)->capture_default_str();
  interpret->add_option("--input", ia.input, "Token string such as 0110")
      ->required();
  interpret->add_option("--layers", ia.layers, "0 uses the program's hint");

  ForwardArgs fa;
  auto* forward = app.add_subcommand("forward", "Readout logits of a saved model");
  forward->add_option("--weights", fa.weights)->required()->check(CLI::ExistingFile);
  forward->add_option("--input", fa.inputs, "Token strings")->required();
  forward->add_option("--layers", fa.layers, "Override the layer count");

  MachineArgs za;
  auto* zmap = app.add_subcommand("zmap", "Weights emulating a prefix machine");
  zmap->add_option("--tm", za.tm, "Toy machine name or JSON file")->required();
  zmap->add_option("--z", za.z, "Program bits")->required();
  zmap->add_option("--rt", za.rt)->check(CLI::PositiveNumber)->capture_default_str();
  zmap->add_option("--rs", za.rs)->check(CLI::PositiveNumber)->capture_default_str();
  zmap->add_option("--input", za.inputs, "Probe inputs to compare");
  zmap->add_option("--weights", za.weights, "Output weights file");

  MachineArgs ea;
  auto* emulate = app.add_subcommand("emulate-tm", "Run a prefix machine");
  emulate->add_option("--tm", ea.tm)->required();
  emulate->add_option("--z", ea.z)->required();
  emulate->add_option("--rt", ea.rt)->check(CLI::PositiveNumber)->capture_default_str();
  emulate->add_option("--rs", ea.rs)->check(CLI::PositiveNumber)->capture_default_str();
  emulate->add_option("--input", ea.inputs);

  EnumArgs na;
  auto* enumb = app.add_subcommand("enum-bounds",
                                   "Bounded two-part and mixture codelengths");
  enumb->add_option("--tm", na.tm)->required();
  enumb->add_option("--rt", na.rt)->check(CLI::PositiveNumber)->capture_default_str();
  enumb->add_option("--rs", na.rs)->check(CLI::PositiveNumber)->capture_default_str();
  enumb->add_option("--max-len", na.max_len)->check(CLI::Range(0, 24))
      ->capture_default_str();
  enumb->add_option("--dataset", na.dataset, "tokens<TAB>label lines")
      ->required()->check(CLI::ExistingFile);

  EvalArgs va;
  auto* eval = app.add_subcommand("eval-codelength",
                                  "Codelength report of a weight distribution");
  eval->add_option("--weights", va.weights)->required()->check(CLI::ExistingFile);
  eval->add_option("--bundle", va.bundle)->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", va.dataset)->required()->check(CLI::ExistingFile);
  eval->add_option("--mc-samples", va.mc_samples)->check(CLI::PositiveNumber)
      ->capture_default_str();

  TrainArgs ta;
  auto* trainc = app.add_subcommand("train", "MLE or variational training");
  AddTrainOptions(trainc, ta);

  TableArgs t1;
  auto* table1 = app.add_subcommand("reproduce-table1", "Parity result table");
  table1->add_option("--scale", t1.scale)->check(CLI::IsMember({"desk", "full"}))
      ->capture_default_str();
  auto* table2 = app.add_subcommand("reproduce-table2", "Identity MLP result table");

  FrontierArgs fr;
  auto* frontier = app.add_subcommand("frontier", "Bit-transmission KL frontier");
  frontier->add_option("--prior", fr.prior)
      ->check(CLI::IsMember({"unimodal", "multimodal"}))->capture_default_str();
  frontier->add_option("--mu-min", fr.grid.mu_min)->capture_default_str();
  frontier->add_option("--mu-max", fr.grid.mu_max)->capture_default_str();
  frontier->add_option("--mu-steps", fr.grid.mu_steps)->check(CLI::PositiveNumber)
      ->capture_default_str();
  frontier->add_option("--log10-var-min", fr.grid.log10_var_min)->capture_default_str();
  frontier->add_option("--log10-var-max", fr.grid.log10_var_max)->capture_default_str();
  frontier->add_option("--var-steps", fr.grid.var_steps)->check(CLI::PositiveNumber)
      ->capture_default_str();
  frontier->add_option("--prior-nu", fr.grid.prior_nu, "Mixture component raw variance")
      ->capture_default_str();

  // A [section] in a --config file selects its subcommand.
  for (CLI::App* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code;
  }

  try {
    RunDir dir(g.out);
    dir.Write("config.ini", RunConfig(app, g));
    dir.Write("seed", std::to_string(g.seed) + "\n");
    if (*compile) return RunCompile(ca, dir, out);
    if (*interpret) return RunInterpret(ia, out);
    if (*forward) return RunForward(fa, out);
    if (*zmap) return RunZmap(za, dir, out);
    if (*emulate) return RunEmulate(ea, out);
    if (*enumb) return RunEnumBounds(na, dir, out);
    if (*eval) return RunEvalCodelength(va, g, dir, out);
    if (*trainc) return RunTrain(ta, g, dir, out, err);
    if (*table1)
      return RunTable(experiments::ReproduceTable1(
                          experiments::PresetFor(experiments::ParseScale(t1.scale)),
                          g.seed, &err),
                      dir, out);
    if (*table2)
      return RunTable(experiments::ReproduceTable2({}, g.seed, &err), dir, out);
    if (*frontier) return RunFrontier(fr, dir, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace mdlxf::cli
