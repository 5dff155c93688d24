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

#ifndef MDLXF_TOYS_H_
#define MDLXF_TOYS_H_

#include <string>
#include <vector>

#include "mdlxf/ptm.h"
#include "mdlxf/symprog.h"

// Small machines shared by tests, benchmarks and the CLI.
namespace mdlxf::toys {

// Ignores program and input; writes 0,1,0 (logit +1/1) over three steps.
ptm::PrefixTMSpec ConstantMachine();

// Copies the first program bit to the sign; logit -1 or +1.
ptm::PrefixTMSpec SignBitMachine();

// Writes +1/1 when the first input symbol is 1 and +0/1 otherwise.
ptm::PrefixTMSpec FirstInputMachine();

// Moves the work head right forever.
ptm::PrefixTMSpec LoopRightMachine();

// Copies a self-delimiting program s 1^a 0 1^(b-1) 0 to the output tape.
ptm::PrefixTMSpec EchoMachine();

// Program p 1^k 0: logit (parity(x) xor p) ? -1/(k+1) : +1/(k+1).
ptm::PrefixTMSpec ParityScaleMachine();

// Counts the ones of x in unary on the work tape, then writes
// numerator = count and takes the denominator from the program 1^k 0.
ptm::PrefixTMSpec CountOnesMachine();

struct NamedPrefixMachine {
  std::string name;
  ptm::PrefixTMSpec spec;
};
std::vector<NamedPrefixMachine> PrefixMachines();

// Single-tape machines over {0,1}.
symprog::SingleTapeMachine HaltMachine();
symprog::SingleTapeMachine WriteOneMachine();
symprog::SingleTapeMachine MoveRightTwiceMachine();
symprog::SingleTapeMachine UnaryIncrementMachine();
symprog::SingleTapeMachine BitFlipMachine();
symprog::SingleTapeMachine BinaryIncrementMachine();

struct NamedTapeMachine {
  std::string name;
  symprog::SingleTapeMachine machine;
};
std::vector<NamedTapeMachine> TapeMachines();

}  // namespace mdlxf::toys

#endif  // MDLXF_TOYS_H_
