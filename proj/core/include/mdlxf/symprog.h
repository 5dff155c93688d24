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

#ifndef MDLXF_SYMPROG_H_
#define MDLXF_SYMPROG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdlxf/ptm.h"
#include "mdlxf/vocab.h"

// A small symbolic language for position-parallel programs that compile to
// Transformer weights, plus its reference interpreter.
namespace mdlxf::symprog {

enum class VarKind { kCategorical, kBinary, kNumerical };

const char* VarKindName(VarKind kind);

// Value a signed binary variable holds when no bit is stored.
inline constexpr int kUnset = -1;

struct VariableSpec {
  std::string name;
  VarKind kind = VarKind::kCategorical;
  int range = 2;  // categorical only
  std::int64_t default_value = 0;
  // token id -> initial value; tokens not listed take default_value.
  std::map<int, std::int64_t> init;
  // Binary only: embedded as +1/-1 with 0 meaning kUnset.
  bool signed_embedding = false;
};

enum class HeadKind { kQKV, kRelative };
enum class Aggregate { kUnique, kMean };

// An attention head writes a transient variable named `name` each layer.
// Its kind follows the value variable (kMean heads are numerical).
struct AttentionHeadSpec {
  std::string name;
  HeadKind kind = HeadKind::kQKV;
  std::string query;
  std::string key;
  std::string value;
  int offset = 1;  // relative heads: -1 or +1
  Aggregate aggregate = Aggregate::kUnique;
};

struct Condition {
  std::string var;
  std::int64_t value = 0;
  bool negate = false;
};

struct Assignment {
  std::string var;
  std::int64_t value = 0;
};

struct Increment {
  std::string var;
  std::int64_t delta = 0;
};

struct Rule {
  std::vector<Condition> when;
  std::vector<Assignment> set;
  std::vector<Increment> add;
};

struct SymbolicProgram {
  std::string name;
  Vocabulary vocab;
  std::vector<VariableSpec> variables;
  std::vector<AttentionHeadSpec> heads;
  std::vector<Rule> rules;
  std::vector<std::string> outputs;
  int num_layers = 1;  // hint

  const VariableSpec* FindVariable(const std::string& name) const;
  const AttentionHeadSpec* FindHead(const std::string& name) const;
};

// Exact value: integers for categorical/binary/numerical state, reduced
// fractions only at averaging heads.
struct Value {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Value Int(std::int64_t v) { return {v, 1}; }
  double ToDouble() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  bool is_int() const { return den == 1; }
  bool operator==(const Value& o) const {
    return num == o.num && den == o.den;
  }
};

struct InterpretResult {
  std::vector<std::string> names;  // variables then head outputs
  // state[position][index into names]
  std::vector<std::vector<Value>> state;
  std::vector<std::string> diagnostics;  // runtime assertion failures
  int readout_position = -1;

  Value Get(std::size_t position, const std::string& name) const;
  // Output variable values at the readout position.
  std::vector<Value> Outputs(const SymbolicProgram& program) const;
};

// Runs `layers` rounds of head reads followed by simultaneous rule
// application. Relative heads read 0 past the sequence ends. Unique qkv
// heads without exactly one matching key report a diagnostic and read 0.
InterpretResult Interpret(const SymbolicProgram& program,
                          const std::vector<int>& token_ids, int layers);

// Static checks: ranges, name references, rule determinism.
std::vector<std::string> Validate(const SymbolicProgram& program);

// Single-tape machine over symbols 0..num_symbols-1; the program's tape is
// START, cells, END and the head starts on START.
struct SingleTapeMachine {
  struct Out {
    int state = 0;
    std::optional<int> symbol;
    ptm::Move move = ptm::Move::kStay;
    bool halt = false;
  };
  int num_states = 1;
  int num_symbols = 2;
  // transition[state][read symbol], read symbol in [0, num_symbols + 2)
  // where num_symbols is START and num_symbols + 1 is END.
  std::vector<std::vector<Out>> transition;

  int start_symbol() const { return num_symbols; }
  int end_symbol() const { return num_symbols + 1; }
};

struct SingleTapeState {
  std::vector<int> tape;  // includes START and END cells
  int head = 0;
  int state = 0;
  bool halted = false;
};

// Reference step semantics used to cross-check the emulator program.
SingleTapeState RunSingleTape(const SingleTapeMachine& m,
                              const std::vector<int>& cells, int steps);

SymbolicProgram BuildSingleTapeTMProgram(const SingleTapeMachine& machine);

// Emulates a prefix machine over the prompted layout with r_s prompts.
// When z is given, prompt rows initialise the program bits from it.
SymbolicProgram BuildPrefixTMProgram(const ptm::Machine& machine, int r_s,
                                     const std::optional<ptm::ProgramBits>& z =
                                         std::nullopt);

// Layers the prefix emulator needs for a run of `steps` machine steps.
inline int PrefixTMLayers(std::int64_t steps) {
  return static_cast<int>(steps) + 2;
}

// Parity over {0,1} strings, one position per layer from right to left.
// Output "parity" at SEP: 0 even, 1 odd.
SymbolicProgram BuildParityProgram(int num_prompts = 0);

// Per-position copy of a binary input into a second binary variable.
SymbolicProgram BuildCopyProgram();

nlohmann::json ProgramToJson(const SymbolicProgram& program);
SymbolicProgram ProgramFromJson(const nlohmann::json& j);

}  // namespace mdlxf::symprog

#endif  // MDLXF_SYMPROG_H_
