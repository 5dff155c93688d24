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

#ifndef MDLXF_PTM_H_
#define MDLXF_PTM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdlxf/common.h"

// Multi-tape prefix Turing machines with resource-bounded execution.
//
// Tapes: a binary read-only program tape whose head only moves right, a
// read-only input tape, one work tape and num_output_tapes binary
// write-once output tapes. Tapes are one-sided and indexed from 0.
namespace mdlxf::ptm {

enum class Move : std::int8_t { kLeft = -1, kStay = 0, kRight = 1 };

// Wildcard for the read fields of a transition.
inline constexpr int kAny = -1;

struct Transition {
  int state = 0;
  int program = kAny;  // 0, 1 or kAny
  int input = kAny;    // [0, input_alphabet]; input_alphabet is the blank
  int work = kAny;     // [0, work_symbols); 0 is the blank

  int next_state = 0;
  std::optional<int> work_write;
  Move work_move = Move::kStay;
  Move input_move = Move::kStay;
  bool program_advance = false;
  // One entry per output tape (or empty for no writes). A write appends the
  // bit and advances that tape's head.
  std::vector<std::optional<int>> output_writes;
  bool halt = false;
};

struct PrefixTMSpec {
  int num_states = 1;
  int work_symbols = 1;
  int input_alphabet = 1;
  int num_output_tapes = 1;
  std::vector<Transition> transitions;

  int input_blank() const { return input_alphabet; }
};

struct ResourceBound {
  std::int64_t r_t = 1;
  std::int64_t r_s = 1;

  bool valid() const { return r_t >= 1 && r_s >= 1; }
};

using ProgramBits = std::vector<int>;

ProgramBits ParseBits(const std::string& text);
std::string BitsToString(const ProgramBits& bits);

struct RationalLogit {
  bool negative = false;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double value() const {
    const double v = static_cast<double>(numerator) /
                     static_cast<double>(denominator);
    return negative ? -v : v;
  }
  std::string ToString() const;
};

enum class RunStatus { kHalted, kResourceExceeded, kProgramExhausted };

const char* RunStatusName(RunStatus status);

struct RunOutcome {
  RunStatus status = RunStatus::kResourceExceeded;
  std::vector<std::vector<int>> output_tapes;
  std::int64_t steps = 0;
  std::int64_t max_registers = 0;
  // Machine state at the end of the run; useful for differential tests.
  int final_state = 0;
  std::vector<int> work_tape;
  std::int64_t program_head = 0;
  std::int64_t input_head = 0;
  std::int64_t work_head = 0;
};

class DecodeError : public Error {
 public:
  DecodeError(int tape, std::size_t position, const std::string& what)
      : Error(what), tape_(tape), position_(position) {}
  int tape() const { return tape_; }
  std::size_t position() const { return position_; }

 private:
  int tape_;
  std::size_t position_;
};

// A validated machine with a dense transition lookup table.
class Machine {
 public:
  // Throws ValidationError when the table is malformed: out-of-range fields,
  // a concrete configuration with no entry (missing case) or with two.
  explicit Machine(PrefixTMSpec spec);

  const PrefixTMSpec& spec() const { return spec_; }

  // Index of the transition for a concrete configuration.
  int Lookup(int state, int program_bit, int input, int work) const;

  // True when the chosen transition depends on the program bit.
  bool ReadsProgram(int state, int input, int work) const {
    return Lookup(state, 0, input, work) != Lookup(state, 1, input, work);
  }

 private:
  PrefixTMSpec spec_;
  std::vector<int> table_;
};

// Executes the machine. The input tape holds x followed by blanks; the
// input head is clamped to [0, |x|]. Left moves at cell 0 are no-ops. The
// input tape is read-only and is not charged against r_s.
RunOutcome Run(const Machine& tm, const ProgramBits& z,
               const std::vector<int>& input, const ResourceBound& bound);

// Decodes one logit per tape from s, 1^numerator, 0, 1^(denominator-1).
// Sign bit 0 is non-negative. Throws DecodeError.
std::vector<RationalLogit> DecodeOutputTapes(
    const std::vector<std::vector<int>>& tapes);

// Inverse of DecodeOutputTapes for one logit.
std::vector<int> EncodeLogit(const RationalLogit& logit);

// f_T^z restricted to a resource bound. Undefined inputs map to nullopt.
class ModelFunction {
 public:
  ModelFunction(const Machine& tm, ProgramBits z, ResourceBound bound)
      : tm_(&tm), z_(std::move(z)), bound_(bound) {}

  std::optional<std::vector<RationalLogit>> operator()(
      const std::vector<int>& input) const;

 private:
  const Machine* tm_;
  ProgramBits z_;
  ResourceBound bound_;
};

struct EnumeratedProgram {
  ProgramBits z;
  // values[i] holds the decoded logits on probe i.
  std::vector<std::vector<RationalLogit>> values;
};

// Depth-first prefix enumeration of programs of length <= max_len that halt
// with valid output on every probe. The result is prefix-free.
std::vector<EnumeratedProgram> EnumerateHaltingPrograms(
    const Machine& tm, const ResourceBound& bound, int max_len,
    const std::vector<std::vector<int>>& probes);

struct LabeledSequence {
  std::vector<int> tokens;
  int label = 0;
};

// log2 p(label | logits). A single logit l scores two classes as (0, l).
double Log2Likelihood(const std::vector<RationalLogit>& logits, int label);

struct OracleReport {
  double c_two_part = 0;       // bits; +inf when nothing halts
  double c_bayes_bounded = 0;  // bits; +inf when nothing halts
  std::optional<ProgramBits> argmin_program;
  double kraft_sum = 0;
  std::size_t num_programs = 0;

  nlohmann::json ToJson() const;
};

OracleReport BoundedCodelengthOracles(
    const Machine& tm, const ResourceBound& bound, int max_len,
    const std::vector<LabeledSequence>& dataset);

// JSON machine descriptions. Read fields accept "*" as a wildcard and
// "blank" for the input blank; moves are "L", "R" or "N".
PrefixTMSpec SpecFromJson(const nlohmann::json& j);
nlohmann::json SpecToJson(const PrefixTMSpec& spec);

}  // namespace mdlxf::ptm

#endif  // MDLXF_PTM_H_
