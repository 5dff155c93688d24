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

#include "mdlxf/ptm.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace mdlxf::ptm {
namespace {

bool InRangeOrAny(int v, int lo, int hi) {
  return v == kAny || (v >= lo && v < hi);
}

bool Matches(int field, int value) { return field == kAny || field == value; }

Move ParseMove(const nlohmann::json& j) {
  if (j.is_null()) return Move::kStay;
  const std::string s = j.get<std::string>();
  if (s == "L") return Move::kLeft;
  if (s == "R") return Move::kRight;
  if (s == "N" || s.empty()) return Move::kStay;
  throw ValidationError("unknown move '" + s + "'");
}

const char* MoveName(Move m) {
  switch (m) {
    case Move::kLeft: return "L";
    case Move::kRight: return "R";
    default: return "N";
  }
}

int ParseRead(const nlohmann::json& j, int blank) {
  if (j.is_null()) return kAny;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "*") return kAny;
    if (s == "blank") return blank;
    return std::stoi(s);
  }
  return j.get<int>();
}

nlohmann::json ReadToJson(int v) {
  if (v == kAny) return "*";
  return v;
}

}  // namespace

ProgramBits ParseBits(const std::string& text) {
  ProgramBits bits;
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(c - '0');
    } else if (c != ',' && c != ' ') {
      throw ValidationError(std::string("program bits must be 0/1, got '") +
                            c + "'");
    }
  }
  return bits;
}

std::string BitsToString(const ProgramBits& bits) {
  std::string s;
  for (int b : bits) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::string RationalLogit::ToString() const {
  std::ostringstream os;
  os << (negative ? "-" : "+") << numerator << "/" << denominator;
  return os.str();
}

const char* RunStatusName(RunStatus status) {
  switch (status) {
    case RunStatus::kHalted: return "halted";
    case RunStatus::kResourceExceeded: return "resource_exceeded";
    case RunStatus::kProgramExhausted: return "program_exhausted";
  }
  return "unknown";
}

Machine::Machine(PrefixTMSpec spec) : spec_(std::move(spec)) {
  const auto& s = spec_;
  if (s.num_states < 1 || s.work_symbols < 1 || s.input_alphabet < 1 ||
      s.num_output_tapes < 1) {
    throw ValidationError("machine needs >= 1 state, work symbol, input "
                          "symbol and output tape");
  }
  const int n_in = s.input_alphabet + 1;
  for (std::size_t i = 0; i < s.transitions.size(); ++i) {
    const Transition& t = s.transitions[i];
    const std::string where = "transition " + std::to_string(i) + ": ";
    if (t.state < 0 || t.state >= s.num_states)
      throw ValidationError(where + "state out of range");
    if (!InRangeOrAny(t.program, 0, 2))
      throw ValidationError(where + "program symbol must be 0, 1 or *");
    if (!InRangeOrAny(t.input, 0, n_in))
      throw ValidationError(where + "input symbol out of range");
    if (!InRangeOrAny(t.work, 0, s.work_symbols))
      throw ValidationError(where + "work symbol out of range");
    if (t.next_state < 0 || t.next_state >= s.num_states)
      throw ValidationError(where + "next state out of range");
    if (t.work_write && (*t.work_write < 0 || *t.work_write >= s.work_symbols))
      throw ValidationError(where + "work write out of range");
    if (!t.output_writes.empty() &&
        static_cast<int>(t.output_writes.size()) != s.num_output_tapes)
      throw ValidationError(where + "output writes must cover every tape");
    for (const auto& w : t.output_writes) {
      if (w && *w != 0 && *w != 1)
        throw ValidationError(where + "output tapes are binary");
    }
  }
  table_.assign(static_cast<std::size_t>(s.num_states) * 2 * n_in *
                    s.work_symbols,
                -1);
  std::vector<std::string> problems;
  for (int st = 0; st < s.num_states; ++st) {
    for (int p = 0; p < 2; ++p) {
      for (int in = 0; in < n_in; ++in) {
        for (int w = 0; w < s.work_symbols; ++w) {
          int found = -1;
          int count = 0;
          for (std::size_t i = 0; i < s.transitions.size(); ++i) {
            const Transition& t = s.transitions[i];
            if (t.state == st && Matches(t.program, p) &&
                Matches(t.input, in) && Matches(t.work, w)) {
              if (found < 0) found = static_cast<int>(i);
              ++count;
            }
          }
          if (count != 1 && problems.size() < 8) {
            std::ostringstream os;
            os << (count == 0 ? "missing case" : "ambiguous case")
               << " (state=" << st << ", program=" << p << ", input=" << in
               << ", work=" << w << ")";
            problems.push_back(os.str());
          }
          table_[((static_cast<std::size_t>(st) * 2 + p) * n_in + in) *
                     s.work_symbols +
                 w] = found;
        }
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid transition table:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
}

int Machine::Lookup(int state, int program_bit, int input, int work) const {
  const int n_in = spec_.input_alphabet + 1;
  return table_[((static_cast<std::size_t>(state) * 2 + program_bit) * n_in +
                 input) *
                    spec_.work_symbols +
                work];
}

RunOutcome Run(const Machine& tm, const ProgramBits& z,
               const std::vector<int>& input, const ResourceBound& bound) {
  const PrefixTMSpec& spec = tm.spec();
  for (int sym : input) {
    if (sym < 0 || sym >= spec.input_alphabet)
      throw ValidationError("input symbol " + std::to_string(sym) +
                            " outside the input alphabet");
  }
  RunOutcome out;
  out.output_tapes.assign(spec.num_output_tapes, {});
  out.work_tape.assign(1, 0);
  out.max_registers = 1;
  if (bound.r_s < 1) {
    out.status = RunStatus::kResourceExceeded;
    return out;
  }
  const auto n = static_cast<std::int64_t>(input.size());
  const auto zlen = static_cast<std::int64_t>(z.size());
  int state = 0;
  std::int64_t prog = 0, in = 0, w = 0;
  auto finish = [&](RunStatus status) {
    out.status = status;
    out.final_state = state;
    out.program_head = prog;
    out.input_head = in;
    out.work_head = w;
    return out;
  };
  while (true) {
    const int in_sym = in < n ? input[in] : spec.input_blank();
    const int work_sym = out.work_tape[w];
    int bit = 0;
    if (out.steps >= bound.r_t) return finish(RunStatus::kResourceExceeded);
    if (prog < zlen) {
      bit = z[prog];
    } else if (tm.ReadsProgram(state, in_sym, work_sym)) {
      return finish(RunStatus::kProgramExhausted);
    }
    const Transition& t = spec.transitions[tm.Lookup(state, bit, in_sym,
                                                     work_sym)];
    ++out.steps;
    if (t.work_write) out.work_tape[w] = *t.work_write;
    for (std::size_t k = 0; k < t.output_writes.size(); ++k) {
      if (!t.output_writes[k]) continue;
      auto& tape = out.output_tapes[k];
      tape.push_back(*t.output_writes[k]);
      const auto used = static_cast<std::int64_t>(tape.size());
      out.max_registers = std::max(out.max_registers, used);
      if (used > bound.r_s) return finish(RunStatus::kResourceExceeded);
    }
    if (t.work_move == Move::kRight) {
      ++w;
      out.max_registers = std::max(out.max_registers, w + 1);
      if (w + 1 > bound.r_s) return finish(RunStatus::kResourceExceeded);
      if (w >= static_cast<std::int64_t>(out.work_tape.size()))
        out.work_tape.push_back(0);
    } else if (t.work_move == Move::kLeft && w > 0) {
      --w;
    }
    if (t.input_move == Move::kRight) {
      in = std::min(in + 1, n);
    } else if (t.input_move == Move::kLeft && in > 0) {
      --in;
    }
    if (t.program_advance) {
      ++prog;
      out.max_registers = std::max(out.max_registers, prog + 1);
      if (prog + 1 > bound.r_s) return finish(RunStatus::kResourceExceeded);
    }
    state = t.next_state;
    if (t.halt) return finish(RunStatus::kHalted);
  }
}

std::vector<RationalLogit> DecodeOutputTapes(
    const std::vector<std::vector<int>>& tapes) {
  std::vector<RationalLogit> logits;
  logits.reserve(tapes.size());
  for (std::size_t k = 0; k < tapes.size(); ++k) {
    const auto& tape = tapes[k];
    const int tk = static_cast<int>(k);
    if (tape.empty()) throw DecodeError(tk, 0, "missing sign bit");
    RationalLogit r;
    if (tape[0] != 0 && tape[0] != 1)
      throw DecodeError(tk, 0, "sign bit must be 0 or 1");
    r.negative = tape[0] == 1;
    std::size_t i = 1;
    while (i < tape.size() && tape[i] == 1) {
      ++r.numerator;
      ++i;
    }
    if (i >= tape.size()) throw DecodeError(tk, i, "missing separator");
    if (tape[i] != 0) throw DecodeError(tk, i, "expected separator 0");
    ++i;
    for (; i < tape.size(); ++i) {
      if (tape[i] != 1)
        throw DecodeError(tk, i, "unexpected symbol in denominator");
      ++r.denominator;
    }
    logits.push_back(r);
  }
  return logits;
}

std::vector<int> EncodeLogit(const RationalLogit& logit) {
  if (logit.denominator == 0)
    throw ValidationError("denominator must be positive");
  std::vector<int> tape;
  tape.push_back(logit.negative ? 1 : 0);
  tape.insert(tape.end(), logit.numerator, 1);
  tape.push_back(0);
  tape.insert(tape.end(), logit.denominator - 1, 1);
  return tape;
}

std::optional<std::vector<RationalLogit>> ModelFunction::operator()(
    const std::vector<int>& input) const {
  try {
    RunOutcome r = Run(*tm_, z_, input, bound_);
    if (r.status != RunStatus::kHalted) return std::nullopt;
    return DecodeOutputTapes(r.output_tapes);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<EnumeratedProgram> EnumerateHaltingPrograms(
    const Machine& tm, const ResourceBound& bound, int max_len,
    const std::vector<std::vector<int>>& probes) {
  if (max_len < 0) throw ValidationError("max_len must be non-negative");
  if (max_len > bound.r_s) throw ValidationError("max_len exceeds r_s");
  std::vector<EnumeratedProgram> found;
  ProgramBits z;
  std::function<void()> visit = [&] {
    bool exhausted = false;
    std::vector<std::vector<RationalLogit>> values;
    values.reserve(probes.size());
    for (const auto& x : probes) {
      RunOutcome r = Run(tm, z, x, bound);
      if (r.status == RunStatus::kResourceExceeded) return;
      if (r.status == RunStatus::kProgramExhausted) {
        exhausted = true;
        continue;
      }
      try {
        values.push_back(DecodeOutputTapes(r.output_tapes));
      } catch (const DecodeError&) {
        return;  // extensions replay the same run
      }
    }
    if (!exhausted) {
      found.push_back({z, std::move(values)});
      return;
    }
    if (static_cast<int>(z.size()) >= max_len) return;
    for (int b = 0; b < 2; ++b) {
      z.push_back(b);
      visit();
      z.pop_back();
    }
  };
  visit();
  return found;
}

double Log2Likelihood(const std::vector<RationalLogit>& logits, int label) {
  std::vector<double> l;
  if (logits.size() == 1) {
    l = {0.0, logits[0].value()};
  } else {
    for (const auto& r : logits) l.push_back(r.value());
  }
  if (label < 0 || label >= static_cast<int>(l.size()))
    throw ValidationError("label out of range for the machine's outputs");
  const double m = *std::max_element(l.begin(), l.end());
  double s = 0;
  for (double v : l) s += std::exp(v - m);
  return NatsToBits(l[label] - m - std::log(s));
}

nlohmann::json OracleReport::ToJson() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  nlohmann::json j;
  j["c_two_part"] = num(c_two_part);
  j["c_bayes_bounded"] = num(c_bayes_bounded);
  j["argmin_program"] = argmin_program
                            ? nlohmann::json(BitsToString(*argmin_program))
                            : nlohmann::json(nullptr);
  j["kraft_sum"] = kraft_sum;
  j["num_programs"] = num_programs;
  return j;
}

OracleReport BoundedCodelengthOracles(
    const Machine& tm, const ResourceBound& bound, int max_len,
    const std::vector<LabeledSequence>& dataset) {
  std::vector<std::vector<int>> probes;
  probes.reserve(dataset.size());
  for (const auto& ex : dataset) probes.push_back(ex.tokens);
  const auto programs = EnumerateHaltingPrograms(tm, bound, max_len, probes);
  OracleReport rep;
  rep.num_programs = programs.size();
  const double inf = std::numeric_limits<double>::infinity();
  if (programs.empty()) {
    rep.c_two_part = inf;
    rep.c_bayes_bounded = inf;
    return rep;
  }
  // a_i = log2(2^-|z_i| p(Y|X; f_i)).
  std::vector<double> a;
  a.reserve(programs.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    const auto& prog = programs[i];
    double v = -static_cast<double>(prog.z.size());
    for (std::size_t j = 0; j < dataset.size(); ++j)
      v += Log2Likelihood(prog.values[j], dataset[j].label);
    a.push_back(v);
    if (v > a[best]) best = i;
    rep.kraft_sum += std::exp2(-static_cast<double>(prog.z.size()));
  }
  const double m = a[best];
  double s = 0;
  for (double v : a) s += std::exp2(v - m);
  rep.c_two_part = -m;
  rep.c_bayes_bounded = -(m + std::log2(s));
  rep.argmin_program = programs[best].z;
  return rep;
}

PrefixTMSpec SpecFromJson(const nlohmann::json& j) {
  PrefixTMSpec s;
  try {
    s.num_states = j.at("num_states").get<int>();
    s.work_symbols = j.value("work_symbols", 1);
    s.input_alphabet = j.at("input_alphabet").get<int>();
    s.num_output_tapes = j.value("num_output_tapes", 1);
    for (const auto& e : j.at("transitions")) {
      Transition t;
      t.state = e.at("state").get<int>();
      t.program = ParseRead(e.value("program", nlohmann::json("*")), 2);
      t.input = ParseRead(e.value("input", nlohmann::json("*")),
                          s.input_alphabet);
      t.work = ParseRead(e.value("work", nlohmann::json("*")), 0);
      t.next_state = e.value("next", t.state);
      if (e.contains("write") && !e["write"].is_null())
        t.work_write = e["write"].get<int>();
      t.work_move = ParseMove(e.value("work_move", nlohmann::json("N")));
      t.input_move = ParseMove(e.value("input_move", nlohmann::json("N")));
      const Move pm = ParseMove(e.value("program_move", nlohmann::json("N")));
      if (pm == Move::kLeft)
        throw ValidationError("program head never moves left");
      t.program_advance = pm == Move::kRight;
      if (e.contains("output")) {
        for (const auto& o : e["output"]) {
          t.output_writes.push_back(o.is_null() ? std::nullopt
                                                : std::optional<int>(o.get<int>()));
        }
      }
      t.halt = e.value("halt", false);
      s.transitions.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed machine description: ") +
                          ex.what());
  }
  return s;
}

nlohmann::json SpecToJson(const PrefixTMSpec& spec) {
  nlohmann::json j;
  j["num_states"] = spec.num_states;
  j["work_symbols"] = spec.work_symbols;
  j["input_alphabet"] = spec.input_alphabet;
  j["num_output_tapes"] = spec.num_output_tapes;
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : spec.transitions) {
    nlohmann::json e;
    e["state"] = t.state;
    e["program"] = ReadToJson(t.program);
    e["input"] = t.input == spec.input_blank() ? nlohmann::json("blank")
                                               : ReadToJson(t.input);
    e["work"] = ReadToJson(t.work);
    e["next"] = t.next_state;
    e["write"] = t.work_write ? nlohmann::json(*t.work_write)
                              : nlohmann::json(nullptr);
    e["work_move"] = MoveName(t.work_move);
    e["input_move"] = MoveName(t.input_move);
    e["program_move"] = t.program_advance ? "R" : "N";
    nlohmann::json o = nlohmann::json::array();
    for (const auto& w : t.output_writes)
      o.push_back(w ? nlohmann::json(*w) : nlohmann::json(nullptr));
    e["output"] = o;
    e["halt"] = t.halt;
    ts.push_back(e);
  }
  j["transitions"] = ts;
  return j;
}

}  // namespace mdlxf::ptm
