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

#include "mdlxf/symprog.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mdlxf::symprog {
namespace {

Value Reduce(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

struct Layout {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;
  int num_vars = 0;
};

Layout MakeLayout(const SymbolicProgram& p) {
  Layout l;
  for (const auto& v : p.variables) l.names.push_back(v.name);
  l.num_vars = static_cast<int>(p.variables.size());
  for (const auto& h : p.heads) l.names.push_back(h.name);
  for (std::size_t i = 0; i < l.names.size(); ++i)
    l.index.emplace(l.names[i], static_cast<int>(i));
  return l;
}

bool ConditionHolds(const Condition& c, const Value& v) {
  const bool eq = v.is_int() && v.num == c.value;
  return c.negate ? !eq : eq;
}

// Two rules can fire together unless some variable is pinned to
// contradictory values.
bool Compatible(const Rule& a, const Rule& b) {
  for (const auto& ca : a.when) {
    for (const auto& cb : b.when) {
      if (ca.var != cb.var) continue;
      if (!ca.negate && !cb.negate && ca.value != cb.value) return false;
      if (ca.negate != cb.negate && ca.value == cb.value) return false;
    }
  }
  return true;
}

}  // namespace

const char* VarKindName(VarKind kind) {
  switch (kind) {
    case VarKind::kCategorical: return "categorical";
    case VarKind::kBinary: return "binary";
    case VarKind::kNumerical: return "numerical";
  }
  return "?";
}

const VariableSpec* SymbolicProgram::FindVariable(
    const std::string& n) const {
  for (const auto& v : variables)
    if (v.name == n) return &v;
  return nullptr;
}

const AttentionHeadSpec* SymbolicProgram::FindHead(
    const std::string& n) const {
  for (const auto& h : heads)
    if (h.name == n) return &h;
  return nullptr;
}

Value InterpretResult::Get(std::size_t position,
                           const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return state.at(position)[i];
  throw ValidationError("no variable named '" + name + "'");
}

std::vector<Value> InterpretResult::Outputs(
    const SymbolicProgram& program) const {
  const std::size_t pos = readout_position >= 0
                              ? static_cast<std::size_t>(readout_position)
                              : state.size() - 1;
  std::vector<Value> out;
  for (const auto& name : program.outputs) out.push_back(Get(pos, name));
  return out;
}

InterpretResult Interpret(const SymbolicProgram& program,
                          const std::vector<int>& token_ids, int layers) {
  const Layout layout = MakeLayout(program);
  const std::size_t n = token_ids.size();
  const std::size_t width = layout.names.size();
  InterpretResult res;
  res.names = layout.names;
  res.readout_position = program.vocab.ReadoutPosition();
  res.state.assign(n, std::vector<Value>(width, Value::Int(0)));
  for (std::size_t p = 0; p < n; ++p) {
    for (int v = 0; v < layout.num_vars; ++v) {
      const auto& spec = program.variables[v];
      auto it = spec.init.find(token_ids[p]);
      res.state[p][v] =
          Value::Int(it != spec.init.end() ? it->second : spec.default_value);
    }
  }
  struct HeadIdx {
    int out, query, key, value;
  };
  std::vector<HeadIdx> hidx;
  for (const auto& h : program.heads) {
    HeadIdx hi{layout.index.at(h.name), -1, -1, layout.index.at(h.value)};
    if (h.kind == HeadKind::kQKV) {
      hi.query = layout.index.at(h.query);
      hi.key = layout.index.at(h.key);
    }
    hidx.push_back(hi);
  }
  struct RuleIdx {
    std::vector<std::pair<int, const Condition*>> when;
    std::vector<std::pair<int, std::int64_t>> set, add;
  };
  std::vector<RuleIdx> ridx;
  for (const auto& r : program.rules) {
    RuleIdx ri;
    for (const auto& c : r.when) ri.when.emplace_back(layout.index.at(c.var), &c);
    for (const auto& a : r.set) ri.set.emplace_back(layout.index.at(a.var), a.value);
    for (const auto& a : r.add) ri.add.emplace_back(layout.index.at(a.var), a.delta);
    ridx.push_back(std::move(ri));
  }

  for (int layer = 0; layer < layers; ++layer) {
    // Attention reads use the pre-layer state of stored variables only.
    for (std::size_t hi = 0; hi < program.heads.size(); ++hi) {
      const auto& h = program.heads[hi];
      const auto& ix = hidx[hi];
      if (h.kind == HeadKind::kRelative) {
        std::vector<Value> out(n, Value::Int(0));
        for (std::size_t p = 0; p < n; ++p) {
          const auto q = static_cast<std::int64_t>(p) + h.offset;
          if (q >= 0 && q < static_cast<std::int64_t>(n))
            out[p] = res.state[q][ix.value];
        }
        for (std::size_t p = 0; p < n; ++p) res.state[p][ix.out] = out[p];
        continue;
      }
      std::map<std::int64_t, std::vector<std::size_t>> by_key;
      for (std::size_t p = 0; p < n; ++p) {
        const Value& k = res.state[p][ix.key];
        by_key[k.num].push_back(p);
      }
      std::vector<Value> out(n, Value::Int(0));
      for (std::size_t p = 0; p < n; ++p) {
        const Value& q = res.state[p][ix.query];
        auto it = by_key.find(q.num);
        if (it == by_key.end()) continue;
        const auto& matches = it->second;
        if (h.aggregate == Aggregate::kUnique) {
          if (matches.size() == 1) {
            out[p] = res.state[matches[0]][ix.value];
          } else if (res.diagnostics.size() < 64) {
            std::ostringstream os;
            os << "layer " << layer << ": head '" << h.name << "' matched "
               << matches.size() << " keys at position " << p;
            res.diagnostics.push_back(os.str());
          }
        } else {
          std::int64_t sum = 0;
          for (std::size_t m : matches) sum += res.state[m][ix.value].num;
          out[p] = Reduce(sum, static_cast<std::int64_t>(matches.size()));
        }
      }
      for (std::size_t p = 0; p < n; ++p) res.state[p][ix.out] = out[p];
    }
    // Rules fire simultaneously on the post-attention state.
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<Value>& row = res.state[p];
      std::vector<std::pair<int, std::int64_t>> sets;
      std::vector<std::pair<int, std::int64_t>> adds;
      for (const auto& r : ridx) {
        bool ok = true;
        for (const auto& [var, cond] : r.when) {
          if (!ConditionHolds(*cond, row[var])) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        sets.insert(sets.end(), r.set.begin(), r.set.end());
        adds.insert(adds.end(), r.add.begin(), r.add.end());
      }
      for (const auto& [var, v] : sets) row[var] = Value::Int(v);
      for (const auto& [var, d] : adds) row[var].num += d;
    }
  }
  return res;
}

std::vector<std::string> Validate(const SymbolicProgram& p) {
  std::vector<std::string> diag;
  std::set<std::string> names;
  auto in_range = [](const VariableSpec& v, std::int64_t x) {
    switch (v.kind) {
      case VarKind::kCategorical: return x >= 0 && x < v.range;
      case VarKind::kBinary:
        return x == 0 || x == 1 || (v.signed_embedding && x == kUnset);
      case VarKind::kNumerical: return true;
    }
    return false;
  };
  for (const auto& v : p.variables) {
    if (!names.insert(v.name).second)
      diag.push_back("duplicate name '" + v.name + "'");
    if (v.kind == VarKind::kCategorical && v.range < 1)
      diag.push_back("variable '" + v.name + "' needs a positive range");
    if (!in_range(v, v.default_value))
      diag.push_back("default of '" + v.name + "' out of range");
    for (const auto& [tok, val] : v.init) {
      if (tok < 0 || tok >= p.vocab.size())
        diag.push_back("init of '" + v.name + "' names unknown token " +
                       std::to_string(tok));
      if (!in_range(v, val))
        diag.push_back("init of '" + v.name + "' out of range");
    }
    if (v.signed_embedding && v.kind != VarKind::kBinary)
      diag.push_back("only binary variables can be signed ('" + v.name +
                     "')");
  }
  // Kind of each head output.
  std::map<std::string, VariableSpec> head_out;
  for (const auto& h : p.heads) {
    if (!names.insert(h.name).second)
      diag.push_back("duplicate name '" + h.name + "'");
    const VariableSpec* val = p.FindVariable(h.value);
    if (!val) {
      diag.push_back("head '" + h.name + "' reads unknown variable '" +
                     h.value + "'");
      continue;
    }
    VariableSpec out = *val;
    out.name = h.name;
    out.signed_embedding = false;
    if (h.kind == HeadKind::kRelative) {
      if (h.offset != -1 && h.offset != 1)
        diag.push_back("relative head '" + h.name + "' offset must be +-1");
      if (h.aggregate != Aggregate::kUnique)
        diag.push_back("relative head '" + h.name + "' cannot average");
    } else {
      const VariableSpec* q = p.FindVariable(h.query);
      const VariableSpec* k = p.FindVariable(h.key);
      if (!q) diag.push_back("head '" + h.name + "' has unknown query '" +
                             h.query + "'");
      if (!k) diag.push_back("head '" + h.name + "' has unknown key '" +
                             h.key + "'");
      if (q && k) {
        if (q->kind == VarKind::kNumerical || k->kind == VarKind::kNumerical ||
            q->kind != k->kind ||
            (q->kind == VarKind::kCategorical && q->range != k->range)) {
          diag.push_back("head '" + h.name +
                         "' needs query and key of the same finite kind");
        }
      }
      if (h.aggregate == Aggregate::kMean) {
        if (val->kind != VarKind::kNumerical)
          diag.push_back("averaging head '" + h.name +
                         "' needs a numerical value");
        out.kind = VarKind::kNumerical;
      }
    }
    head_out.emplace(h.name, out);
  }
  auto lookup = [&](const std::string& n) -> const VariableSpec* {
    if (const VariableSpec* v = p.FindVariable(n)) return v;
    auto it = head_out.find(n);
    return it == head_out.end() ? nullptr : &it->second;
  };
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& r = p.rules[i];
    const std::string where = "rule " + std::to_string(i) + ": ";
    for (const auto& c : r.when) {
      const VariableSpec* v = lookup(c.var);
      if (!v) {
        diag.push_back(where + "unknown variable '" + c.var + "'");
        continue;
      }
      if (v->kind == VarKind::kNumerical)
        diag.push_back(where + "numerical '" + c.var +
                       "' cannot be a condition");
      else if (c.value < 0 || !in_range(*v, c.value))
        diag.push_back(where + "condition value out of range for '" + c.var +
                       "'");
      if (c.negate && v->kind != VarKind::kCategorical)
        diag.push_back(where + "negated conditions need a categorical '" +
                       c.var + "'");
    }
    for (const auto& a : r.set) {
      const VariableSpec* v = p.FindVariable(a.var);
      if (!v) {
        diag.push_back(where + (lookup(a.var) ? "cannot assign head output '"
                                              : "unknown variable '") +
                       a.var + "'");
        continue;
      }
      if (v->kind == VarKind::kNumerical)
        diag.push_back(where + "numerical '" + a.var +
                       "' takes increments, not assignments");
      else if (a.value < 0 || !in_range(*v, a.value))
        diag.push_back(where + "assigned value out of range for '" + a.var +
                       "'");
    }
    for (const auto& a : r.add) {
      const VariableSpec* v = p.FindVariable(a.var);
      if (!v || v->kind != VarKind::kNumerical)
        diag.push_back(where + "increment target '" + a.var +
                       "' is not a numerical variable");
    }
  }
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    for (std::size_t j = i + 1; j < p.rules.size(); ++j) {
      if (!Compatible(p.rules[i], p.rules[j])) continue;
      for (const auto& a : p.rules[i].set) {
        for (const auto& b : p.rules[j].set) {
          if (a.var == b.var) {
            diag.push_back("rules " + std::to_string(i) + " and " +
                           std::to_string(j) +
                           " may both assign '" + a.var +
                           "' (non-deterministic)");
          }
        }
      }
    }
  }
  if (p.outputs.empty()) diag.push_back("program declares no outputs");
  for (const auto& o : p.outputs)
    if (!lookup(o)) diag.push_back("unknown output '" + o + "'");
  return diag;
}

SingleTapeState RunSingleTape(const SingleTapeMachine& m,
                              const std::vector<int>& cells, int steps) {
  SingleTapeState s;
  s.tape.push_back(m.start_symbol());
  s.tape.insert(s.tape.end(), cells.begin(), cells.end());
  s.tape.push_back(m.end_symbol());
  for (int i = 0; i < steps && !s.halted; ++i) {
    const int a = s.tape[s.head];
    const auto& out = m.transition.at(s.state).at(a);
    if (out.symbol) s.tape[s.head] = *out.symbol;
    s.state = out.state;
    s.halted = out.halt;
    if (out.move == ptm::Move::kRight && a != m.end_symbol()) ++s.head;
    if (out.move == ptm::Move::kLeft && a != m.start_symbol()) --s.head;
  }
  return s;
}

SymbolicProgram BuildSingleTapeTMProgram(const SingleTapeMachine& m) {
  const int nsym = m.num_symbols + 2;
  if (static_cast<int>(m.transition.size()) != m.num_states)
    throw ValidationError("transition table needs one row per state");
  for (const auto& row : m.transition) {
    if (static_cast<int>(row.size()) != nsym)
      throw ValidationError("transition rows must cover every symbol "
                            "including START and END");
    for (int a = 0; a < nsym; ++a) {
      const auto& out = row[a];
      if (out.state < 0 || out.state >= m.num_states)
        throw ValidationError("next state out of range");
      if (out.symbol && (*out.symbol < 0 || *out.symbol >= m.num_symbols))
        throw ValidationError("written symbol out of range");
      if (out.symbol && a >= m.num_symbols)
        throw ValidationError("START and END cells cannot be overwritten");
    }
  }
  SymbolicProgram p;
  p.name = "single_tape_tm";
  p.vocab.num_tokens = m.num_symbols;
  p.vocab.num_prompts = 0;
  p.vocab.layout = Vocabulary::Layout::kTape;
  VariableSpec halted{"halted", VarKind::kCategorical, 2, 0, {}, false};
  VariableSpec state{"state", VarKind::kCategorical, m.num_states, 0, {}, false};
  VariableSpec symbol{"symbol", VarKind::kCategorical, nsym, 0, {}, false};
  for (int t = 0; t < m.num_symbols; ++t) symbol.init[t] = t;
  symbol.init[p.vocab.start()] = m.start_symbol();
  symbol.init[p.vocab.end()] = m.end_symbol();
  VariableSpec head{"head", VarKind::kCategorical, 2, 0, {}, false};
  head.init[p.vocab.start()] = 1;
  VariableSpec one{"one", VarKind::kCategorical, 2, 1, {}, false};
  p.variables = {halted, state, symbol, head, one};
  p.heads = {
      {"head_symbol", HeadKind::kQKV, "one", "head", "symbol", 0,
       Aggregate::kUnique},
      {"head_left", HeadKind::kRelative, "", "", "head", -1, Aggregate::kUnique},
      {"head_right", HeadKind::kRelative, "", "", "head", 1, Aggregate::kUnique},
  };
  for (int s = 0; s < m.num_states; ++s) {
    for (int a = 0; a < nsym; ++a) {
      const auto& out = m.transition[s][a];
      const std::vector<Condition> sel = {
          {"halted", 0}, {"state", s}, {"head_symbol", a}};
      Rule main{sel, {}, {}};
      if (out.state != s) main.set.push_back({"state", out.state});
      if (out.halt) main.set.push_back({"halted", 1});
      if (!main.set.empty()) p.rules.push_back(main);
      if (out.symbol && *out.symbol != a) {
        Rule w{sel, {{"symbol", *out.symbol}}, {}};
        w.when.push_back({"head", 1});
        w.when.push_back({"symbol", a});
        p.rules.push_back(w);
      }
      const bool right = out.move == ptm::Move::kRight && a != m.end_symbol();
      const bool left = out.move == ptm::Move::kLeft && a != m.start_symbol();
      if (right || left) {
        Rule clear{sel, {{"head", 0}}, {}};
        clear.when.push_back({"head", 1});
        p.rules.push_back(clear);
        Rule take{sel, {{"head", 1}}, {}};
        take.when.push_back({"head", 0});
        take.when.push_back({right ? "head_left" : "head_right", 1});
        take.when.push_back(
            {"symbol", right ? m.start_symbol() : m.end_symbol(), true});
        p.rules.push_back(take);
      }
    }
  }
  p.outputs = {"symbol"};
  p.num_layers = 1;
  return p;
}

SymbolicProgram BuildPrefixTMProgram(const ptm::Machine& machine, int r_s,
                                     const std::optional<ptm::ProgramBits>& z) {
  const ptm::PrefixTMSpec& spec = machine.spec();
  if (r_s < 1) throw ValidationError("r_s must be at least 1");
  if (z && static_cast<int>(z->size()) > r_s)
    throw ValidationError("|z| exceeds r_s");
  SymbolicProgram p;
  p.name = "prefix_tm";
  p.vocab.num_tokens = spec.input_alphabet;
  p.vocab.num_prompts = r_s;
  p.vocab.layout = Vocabulary::Layout::kPrompted;
  const Vocabulary& voc = p.vocab;
  const int nin = spec.input_alphabet + 1;  // last is blank
  const int W = spec.work_symbols;

  auto bin = [](const std::string& n, std::int64_t def = 0) {
    return VariableSpec{n, VarKind::kBinary, 2, def, {}, false};
  };
  auto cat = [](const std::string& n, int range, std::int64_t def = 0) {
    return VariableSpec{n, VarKind::kCategorical, range, def, {}, false};
  };
  // prog_bit comes first so that it owns embedding column 0.
  VariableSpec prog_bit = bin("prog_bit", kUnset);
  prog_bit.signed_embedding = true;
  if (z) {
    for (std::size_t i = 0; i < z->size(); ++i)
      prog_bit.init[voc.prompt(static_cast<int>(i))] = (*z)[i];
  }
  VariableSpec is_start = bin("is_start");
  is_start.init[voc.start()] = 1;
  VariableSpec is_sep = bin("is_sep");
  is_sep.init[voc.sep()] = 1;
  VariableSpec is_end = bin("is_end");
  is_end.init[voc.end()] = 1;
  VariableSpec in_sym = cat("in_sym", nin, spec.input_blank());
  for (int t = 0; t < spec.input_alphabet; ++t) in_sym.init[t] = t;
  p.variables = {prog_bit,       is_start,      is_sep,
                 is_end,         bin("one", 1), bin("started"),
                 bin("halted"),  cat("state", spec.num_states),
                 bin("prog_head"), in_sym,      bin("in_head"),
                 cat("work_sym", W), bin("work_head"), bin("is_p1"),
                 bin("exceeded")};
  for (int k = 0; k < spec.num_output_tapes; ++k) {
    const std::string s = std::to_string(k);
    VariableSpec key = bin("key_" + s);
    key.init[voc.start()] = 1;
    VariableSpec ohead = bin("ohead_" + s);
    ohead.init[voc.start()] = 1;
    p.variables.push_back(cat("phase_" + s, 3));
    p.variables.push_back(bin("sign_" + s));
    p.variables.push_back(
        VariableSpec{"sum_" + s, VarKind::kNumerical, 0, 0, {}, false});
    p.variables.push_back(key);
    p.variables.push_back(ohead);
  }
  auto qkv = [](const std::string& n, const std::string& k,
                const std::string& v, Aggregate agg = Aggregate::kUnique) {
    return AttentionHeadSpec{n, HeadKind::kQKV, "one", k, v, 0, agg};
  };
  auto rel = [](const std::string& n, const std::string& v, int off) {
    return AttentionHeadSpec{n, HeadKind::kRelative, "", "", v, off,
                             Aggregate::kUnique};
  };
  p.heads = {qkv("cur_prog", "prog_head", "prog_bit"),
             qkv("cur_in", "in_head", "in_sym"),
             qkv("cur_work", "work_head", "work_sym"),
             rel("left_is_start", "is_start", -1),
             rel("left_is_sep", "is_sep", -1),
             rel("prog_left", "prog_head", -1),
             rel("in_left", "in_head", -1),
             rel("in_right", "in_head", 1),
             rel("work_left", "work_head", -1),
             rel("work_right", "work_head", 1)};
  for (int k = 0; k < spec.num_output_tapes; ++k) {
    const std::string s = std::to_string(k);
    p.heads.push_back(rel("out_left_" + s, "ohead_" + s, -1));
    p.heads.push_back(qkv("logit_" + s, "key_" + s, "sum_" + s,
                          Aggregate::kMean));
    p.outputs.push_back("logit_" + s);
  }

  // Layer 1 places the heads on the first program/work cell and the first
  // input cell.
  p.rules.push_back({{{"started", 0}}, {{"started", 1}}, {}});
  p.rules.push_back({{{"started", 0},
                      {"left_is_start", 1},
                      {"prog_head", 0},
                      {"work_head", 0},
                      {"is_p1", 0}},
                     {{"prog_head", 1}, {"work_head", 1}, {"is_p1", 1}},
                     {}});
  p.rules.push_back(
      {{{"started", 0}, {"left_is_sep", 1}, {"in_head", 0}},
       {{"in_head", 1}},
       {}});
  // A head stepping onto SEP has left the prompt region.
  p.rules.push_back(
      {{{"is_sep", 1}, {"prog_head", 1}, {"exceeded", 0}},
       {{"exceeded", 1}},
       {}});
  p.rules.push_back(
      {{{"is_sep", 1}, {"prog_head", 0}, {"work_head", 1}, {"exceeded", 0}},
       {{"exceeded", 1}},
       {}});

  auto emit = [&](std::vector<Condition> sel, const ptm::Transition& t) {
    auto with = [&](std::initializer_list<Condition> extra) {
      std::vector<Condition> c = sel;
      c.insert(c.end(), extra.begin(), extra.end());
      return c;
    };
    const int s = static_cast<int>(sel[2].value);
    const int w = static_cast<int>(sel[4].value);
    Rule main{sel, {}, {}};
    if (t.next_state != s) main.set.push_back({"state", t.next_state});
    if (t.halt) main.set.push_back({"halted", 1});
    if (!main.set.empty()) p.rules.push_back(main);
    if (t.work_write && *t.work_write != w) {
      p.rules.push_back({with({{"work_head", 1}, {"work_sym", w}}),
                         {{"work_sym", *t.work_write}},
                         {}});
    }
    if (t.work_move == ptm::Move::kRight) {
      p.rules.push_back({with({{"work_head", 1}}), {{"work_head", 0}}, {}});
      p.rules.push_back(
          {with({{"work_left", 1}, {"work_head", 0}}), {{"work_head", 1}}, {}});
    } else if (t.work_move == ptm::Move::kLeft) {
      p.rules.push_back(
          {with({{"work_head", 1}, {"is_p1", 0}}), {{"work_head", 0}}, {}});
      p.rules.push_back(
          {with({{"work_right", 1}, {"work_head", 0}, {"is_start", 0}}),
           {{"work_head", 1}},
           {}});
    }
    if (t.program_advance) {
      p.rules.push_back({with({{"prog_head", 1}}), {{"prog_head", 0}}, {}});
      p.rules.push_back(
          {with({{"prog_left", 1}, {"prog_head", 0}}), {{"prog_head", 1}}, {}});
    }
    if (t.input_move == ptm::Move::kRight) {
      p.rules.push_back(
          {with({{"in_head", 1}, {"is_end", 0}}), {{"in_head", 0}}, {}});
      p.rules.push_back(
          {with({{"in_left", 1}, {"in_head", 0}}), {{"in_head", 1}}, {}});
    } else if (t.input_move == ptm::Move::kLeft) {
      p.rules.push_back(
          {with({{"in_head", 1}, {"left_is_sep", 0}}), {{"in_head", 0}}, {}});
      p.rules.push_back(
          {with({{"in_right", 1}, {"in_head", 0}, {"is_sep", 0}}),
           {{"in_head", 1}},
           {}});
    }
    for (std::size_t k = 0; k < t.output_writes.size(); ++k) {
      if (!t.output_writes[k]) continue;
      const int ob = *t.output_writes[k];
      const std::string ks = std::to_string(k);
      const std::string phase = "phase_" + ks, sign = "sign_" + ks;
      p.rules.push_back({with({{phase, 0}, {sign, 0}}),
                         ob ? std::vector<Assignment>{{sign, 1}, {phase, 1}}
                            : std::vector<Assignment>{{phase, 1}},
                         {}});
      if (ob == 1) {
        p.rules.push_back({with({{phase, 1}, {"is_start", 1}, {sign, 0}}),
                           {},
                           {{"sum_" + ks, 1}}});
        p.rules.push_back({with({{phase, 1}, {"is_start", 1}, {sign, 1}}),
                           {},
                           {{"sum_" + ks, -1}}});
        p.rules.push_back(
            {with({{phase, 2}, {"ohead_" + ks, 1}}), {{"ohead_" + ks, 0}}, {}});
        p.rules.push_back({with({{phase, 2},
                                 {"out_left_" + ks, 1},
                                 {"ohead_" + ks, 0},
                                 {"key_" + ks, 0}}),
                           {{"ohead_" + ks, 1}, {"key_" + ks, 1}},
                           {}});
      } else {
        p.rules.push_back({with({{phase, 1}}), {{phase, 2}}, {}});
      }
    }
  };
  for (int s = 0; s < spec.num_states; ++s) {
    for (int a = 0; a < nin; ++a) {
      for (int w = 0; w < W; ++w) {
        std::vector<Condition> sel = {{"started", 1}, {"halted", 0},
                                      {"state", s},   {"cur_in", a},
                                      {"cur_work", w}};
        if (machine.ReadsProgram(s, a, w)) {
          for (int b = 0; b < 2; ++b) {
            auto sb = sel;
            sb.push_back({"cur_prog", b});
            emit(sb, spec.transitions[machine.Lookup(s, b, a, w)]);
          }
        } else {
          emit(sel, spec.transitions[machine.Lookup(s, 0, a, w)]);
        }
      }
    }
  }
  p.num_layers = 2;
  return p;
}

SymbolicProgram BuildParityProgram(int num_prompts) {
  SymbolicProgram p;
  p.name = "parity";
  p.vocab.num_tokens = 2;
  p.vocab.num_prompts = num_prompts;
  p.vocab.layout = Vocabulary::Layout::kPrompted;
  VariableSpec bit{"bit", VarKind::kCategorical, 2, 0, {{1, 1}}, false};
  VariableSpec parity{"parity", VarKind::kCategorical, 2, 0, {}, false};
  VariableSpec done{"done", VarKind::kCategorical, 2, 0, {}, false};
  done.init[p.vocab.end()] = 1;
  p.variables = {bit, parity, done};
  p.heads = {{"right_parity", HeadKind::kRelative, "", "", "parity", 1,
              Aggregate::kUnique},
             {"right_done", HeadKind::kRelative, "", "", "done", 1,
              Aggregate::kUnique}};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      p.rules.push_back({{{"done", 0},
                          {"right_done", 1},
                          {"right_parity", a},
                          {"bit", b}},
                         {{"parity", a ^ b}, {"done", 1}},
                         {}});
    }
  }
  p.outputs = {"parity"};
  p.num_layers = 42;
  return p;
}

SymbolicProgram BuildCopyProgram() {
  SymbolicProgram p;
  p.name = "copy";
  p.vocab.num_tokens = 2;
  p.vocab.num_prompts = 0;
  p.vocab.layout = Vocabulary::Layout::kTape;
  p.variables = {
      VariableSpec{"in", VarKind::kBinary, 2, 0, {{1, 1}}, false},
      VariableSpec{"out", VarKind::kBinary, 2, 0, {}, false}};
  p.rules.push_back({{{"in", 1}}, {{"out", 1}}, {}});
  p.outputs = {"out"};
  p.num_layers = 1;
  return p;
}

}  // namespace mdlxf::symprog
