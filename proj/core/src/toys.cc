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

#include "mdlxf/toys.h"

namespace mdlxf::toys {
namespace {

using ptm::kAny;
using ptm::Move;
using ptm::PrefixTMSpec;
using ptm::Transition;
using symprog::SingleTapeMachine;

// Transition reading (state, program, input, work) that writes `bit` (or
// nothing when bit < 0) to output tape 0.
Transition T(int state, int program, int input, int work, int next, int bit,
             bool halt = false, bool advance = false) {
  Transition t;
  t.state = state;
  t.program = program;
  t.input = input;
  t.work = work;
  t.next_state = next;
  if (bit >= 0) t.output_writes = {bit};
  t.halt = halt;
  t.program_advance = advance;
  return t;
}

PrefixTMSpec Spec(int states, int work_symbols, std::vector<Transition> ts) {
  PrefixTMSpec s;
  s.num_states = states;
  s.work_symbols = work_symbols;
  s.input_alphabet = 2;
  s.num_output_tapes = 1;
  s.transitions = std::move(ts);
  return s;
}

SingleTapeMachine Tape(int states) {
  SingleTapeMachine m;
  m.num_states = states;
  m.num_symbols = 2;
  m.transition.assign(states, std::vector<SingleTapeMachine::Out>(4));
  return m;
}

using Out = SingleTapeMachine::Out;
constexpr int kStart = 2, kEnd = 3;

}  // namespace

PrefixTMSpec ConstantMachine() {
  return Spec(3, 1,
              {T(0, kAny, kAny, kAny, 1, 0), T(1, kAny, kAny, kAny, 2, 1),
               T(2, kAny, kAny, kAny, 2, 0, true)});
}

PrefixTMSpec SignBitMachine() {
  return Spec(3, 1,
              {T(0, 0, kAny, kAny, 1, 0, false, true),
               T(0, 1, kAny, kAny, 1, 1, false, true),
               T(1, kAny, kAny, kAny, 2, 1), T(2, kAny, kAny, kAny, 2, 0, true)});
}

PrefixTMSpec FirstInputMachine() {
  return Spec(4, 1,
              {T(0, kAny, 1, kAny, 2, 0), T(0, kAny, 0, kAny, 1, 0),
               T(0, kAny, 2, kAny, 1, 0), T(1, kAny, kAny, kAny, 1, 0, true),
               T(2, kAny, kAny, kAny, 3, 1),
               T(3, kAny, kAny, kAny, 3, 0, true)});
}

PrefixTMSpec LoopRightMachine() {
  Transition t = T(0, kAny, kAny, kAny, 0, -1);
  t.work_move = Move::kRight;
  return Spec(1, 1, {t});
}

PrefixTMSpec EchoMachine() {
  return Spec(3, 1,
              {T(0, 0, kAny, kAny, 1, 0, false, true),
               T(0, 1, kAny, kAny, 1, 1, false, true),
               T(1, 1, kAny, kAny, 1, 1, false, true),
               T(1, 0, kAny, kAny, 2, 0, false, true),
               T(2, 1, kAny, kAny, 2, 1, false, true),
               T(2, 0, kAny, kAny, 2, -1, true)});
}

PrefixTMSpec ParityScaleMachine() {
  // States: 0 read p; 1 + parity-xor-p scans the input; 3 writes 1;
  // 4 writes 0; 5 copies 1^k then halts on 0. The sign is written on blank.
  std::vector<Transition> ts = {T(0, 0, kAny, kAny, 1, -1, false, true),
                                T(0, 1, kAny, kAny, 2, -1, false, true)};
  for (int s = 1; s <= 2; ++s) {
    Transition t0 = T(s, kAny, 0, kAny, s, -1);
    t0.input_move = Move::kRight;
    Transition t1 = T(s, kAny, 1, kAny, s == 1 ? 2 : 1, -1);
    t1.input_move = Move::kRight;
    ts.push_back(t0);
    ts.push_back(t1);
    ts.push_back(T(s, kAny, 2, kAny, 3, s - 1));
  }
  ts.push_back(T(3, kAny, kAny, kAny, 4, 1));
  ts.push_back(T(4, kAny, kAny, kAny, 5, 0));
  ts.push_back(T(5, 1, kAny, kAny, 5, 1, false, true));
  ts.push_back(T(5, 0, kAny, kAny, 5, -1, true));
  return Spec(6, 1, ts);
}

PrefixTMSpec CountOnesMachine() {
  // 0 scans x and marks one work cell per one; 1 writes the sign at the
  // blank and steps back; 2 emits a 1 per mark while rewinding, then the
  // separator; 3 copies 1^k and halts on 0. Work symbols: 0 blank, 1 mark.
  Transition skip = T(0, kAny, 0, kAny, 0, -1);
  skip.input_move = Move::kRight;
  Transition mark = T(0, kAny, 1, kAny, 0, -1);
  mark.input_move = Move::kRight;
  mark.work_write = 1;
  mark.work_move = Move::kRight;
  Transition back = T(1, kAny, kAny, kAny, 2, -1);
  back.work_move = Move::kLeft;
  Transition emit = T(2, kAny, kAny, 1, 2, 1);
  emit.work_write = 0;
  emit.work_move = Move::kLeft;
  return Spec(4, 2,
              {skip, mark, T(0, kAny, 2, kAny, 1, 0), back, emit,
               T(2, kAny, kAny, 0, 3, 0),
               T(3, 1, kAny, kAny, 3, 1, false, true),
               T(3, 0, kAny, kAny, 3, -1, true)});
}

std::vector<NamedPrefixMachine> PrefixMachines() {
  return {{"constant", ConstantMachine()},
          {"sign_bit", SignBitMachine()},
          {"first_input", FirstInputMachine()},
          {"echo", EchoMachine()},
          {"parity_scale", ParityScaleMachine()},
          {"count_ones", CountOnesMachine()}};
}

SingleTapeMachine HaltMachine() {
  SingleTapeMachine m = Tape(1);
  for (auto& o : m.transition[0]) o = Out{0, {}, Move::kStay, true};
  return m;
}

SingleTapeMachine WriteOneMachine() {
  SingleTapeMachine m = Tape(2);
  for (auto& o : m.transition[0]) o = Out{1, {}, Move::kRight, false};
  for (int a = 0; a < 4; ++a)
    m.transition[1][a] = Out{1, a < 2 ? std::optional<int>(1) : std::nullopt,
                             Move::kStay, true};
  return m;
}

SingleTapeMachine MoveRightTwiceMachine() {
  SingleTapeMachine m = Tape(3);
  for (auto& o : m.transition[0]) o = Out{1, {}, Move::kRight, false};
  for (auto& o : m.transition[1]) o = Out{2, {}, Move::kRight, false};
  for (auto& o : m.transition[2]) o = Out{2, {}, Move::kStay, true};
  return m;
}

SingleTapeMachine UnaryIncrementMachine() {
  SingleTapeMachine m = Tape(2);
  for (auto& o : m.transition[0]) o = Out{1, {}, Move::kRight, false};
  m.transition[1][1] = Out{1, {}, Move::kRight, false};
  m.transition[1][0] = Out{1, 1, Move::kStay, true};
  m.transition[1][kStart] = Out{1, {}, Move::kRight, false};
  m.transition[1][kEnd] = Out{1, {}, Move::kStay, true};
  return m;
}

SingleTapeMachine BitFlipMachine() {
  SingleTapeMachine m = Tape(1);
  m.transition[0][0] = Out{0, 1, Move::kRight, false};
  m.transition[0][1] = Out{0, 0, Move::kRight, false};
  m.transition[0][kStart] = Out{0, {}, Move::kRight, false};
  m.transition[0][kEnd] = Out{0, {}, Move::kStay, true};
  return m;
}

SingleTapeMachine BinaryIncrementMachine() {
  // 0 runs right to END, 1 propagates the carry leftwards.
  SingleTapeMachine m = Tape(2);
  for (auto& o : m.transition[0]) o = Out{0, {}, Move::kRight, false};
  m.transition[0][kEnd] = Out{1, {}, Move::kLeft, false};
  m.transition[1][1] = Out{1, 0, Move::kLeft, false};
  m.transition[1][0] = Out{1, 1, Move::kStay, true};
  m.transition[1][kStart] = Out{1, {}, Move::kStay, true};
  m.transition[1][kEnd] = Out{1, {}, Move::kLeft, false};
  return m;
}

std::vector<NamedTapeMachine> TapeMachines() {
  return {{"halt", HaltMachine()},
          {"write_one", WriteOneMachine()},
          {"move_right_twice", MoveRightTwiceMachine()},
          {"unary_increment", UnaryIncrementMachine()},
          {"bit_flip", BitFlipMachine()},
          {"binary_increment", BinaryIncrementMachine()}};
}

}  // namespace mdlxf::toys
