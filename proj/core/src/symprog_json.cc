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

#include <string>

#include "mdlxf/symprog.h"

namespace mdlxf::symprog {
namespace {

using nlohmann::json;

VarKind KindFromString(const std::string& s) {
  if (s == "categorical") return VarKind::kCategorical;
  if (s == "binary") return VarKind::kBinary;
  if (s == "numerical") return VarKind::kNumerical;
  throw ValidationError("unknown variable kind '" + s + "'");
}

json ConditionsToJson(const std::vector<Condition>& cs) {
  json a = json::array();
  for (const auto& c : cs) {
    json e = {{"var", c.var}, {"value", c.value}};
    if (c.negate) e["negate"] = true;
    a.push_back(e);
  }
  return a;
}

}  // namespace

nlohmann::json ProgramToJson(const SymbolicProgram& p) {
  json j;
  j["name"] = p.name;
  j["vocab"] = {{"num_tokens", p.vocab.num_tokens},
                {"num_prompts", p.vocab.num_prompts},
                {"layout", p.vocab.layout == Vocabulary::Layout::kPrompted
                               ? "prompted"
                               : "tape"}};
  json vars = json::array();
  for (const auto& v : p.variables) {
    json e = {{"name", v.name},
              {"kind", VarKindName(v.kind)},
              {"default", v.default_value}};
    if (v.kind == VarKind::kCategorical) e["range"] = v.range;
    if (v.signed_embedding) e["signed"] = true;
    if (!v.init.empty()) {
      json init = json::object();
      for (const auto& [tok, val] : v.init)
        init[p.vocab.TokenLabel(tok)] = val;
      e["init"] = init;
    }
    vars.push_back(e);
  }
  j["variables"] = vars;
  json heads = json::array();
  for (const auto& h : p.heads) {
    json e = {{"name", h.name}, {"value", h.value}};
    if (h.kind == HeadKind::kRelative) {
      e["type"] = "relative";
      e["offset"] = h.offset;
    } else {
      e["type"] = "qkv";
      e["query"] = h.query;
      e["key"] = h.key;
      e["aggregate"] = h.aggregate == Aggregate::kMean ? "mean" : "unique";
    }
    heads.push_back(e);
  }
  j["heads"] = heads;
  json rules = json::array();
  for (const auto& r : p.rules) {
    json e;
    e["when"] = ConditionsToJson(r.when);
    json set = json::array();
    for (const auto& a : r.set) set.push_back({{"var", a.var}, {"value", a.value}});
    e["set"] = set;
    json add = json::array();
    for (const auto& a : r.add) add.push_back({{"var", a.var}, {"delta", a.delta}});
    e["add"] = add;
    rules.push_back(e);
  }
  j["rules"] = rules;
  j["outputs"] = p.outputs;
  j["num_layers"] = p.num_layers;
  return j;
}

SymbolicProgram ProgramFromJson(const nlohmann::json& j) {
  SymbolicProgram p;
  try {
    p.name = j.value("name", "program");
    const json& v = j.at("vocab");
    p.vocab.num_tokens = v.at("num_tokens").get<int>();
    p.vocab.num_prompts = v.value("num_prompts", 0);
    p.vocab.layout = v.value("layout", "prompted") == "tape"
                         ? Vocabulary::Layout::kTape
                         : Vocabulary::Layout::kPrompted;
    auto token_id = [&](const std::string& label) {
      if (label == "START") return p.vocab.start();
      if (label == "SEP") return p.vocab.sep();
      if (label == "END") return p.vocab.end();
      if (!label.empty() && label[0] == 'p')
        return p.vocab.prompt(std::stoi(label.substr(1)) - 1);
      return std::stoi(label);
    };
    for (const auto& e : j.at("variables")) {
      VariableSpec s;
      s.name = e.at("name").get<std::string>();
      s.kind = KindFromString(e.at("kind").get<std::string>());
      s.range = e.value("range", 2);
      s.default_value = e.value("default", std::int64_t{0});
      s.signed_embedding = e.value("signed", false);
      if (e.contains("init")) {
        for (const auto& [label, val] : e["init"].items())
          s.init[token_id(label)] = val.get<std::int64_t>();
      }
      p.variables.push_back(std::move(s));
    }
    for (const auto& e : j.value("heads", json::array())) {
      AttentionHeadSpec h;
      h.name = e.at("name").get<std::string>();
      h.value = e.at("value").get<std::string>();
      if (e.value("type", "qkv") == "relative") {
        h.kind = HeadKind::kRelative;
        h.offset = e.at("offset").get<int>();
      } else {
        h.kind = HeadKind::kQKV;
        h.query = e.at("query").get<std::string>();
        h.key = e.at("key").get<std::string>();
        h.aggregate = e.value("aggregate", "unique") == "mean"
                          ? Aggregate::kMean
                          : Aggregate::kUnique;
      }
      p.heads.push_back(std::move(h));
    }
    for (const auto& e : j.value("rules", json::array())) {
      Rule r;
      for (const auto& c : e.value("when", json::array()))
        r.when.push_back({c.at("var").get<std::string>(),
                          c.at("value").get<std::int64_t>(),
                          c.value("negate", false)});
      for (const auto& a : e.value("set", json::array()))
        r.set.push_back({a.at("var").get<std::string>(),
                         a.at("value").get<std::int64_t>()});
      for (const auto& a : e.value("add", json::array()))
        r.add.push_back({a.at("var").get<std::string>(),
                         a.at("delta").get<std::int64_t>()});
      p.rules.push_back(std::move(r));
    }
    p.outputs = j.at("outputs").get<std::vector<std::string>>();
    p.num_layers = j.value("num_layers", 1);
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed program: ") + ex.what());
  }
  return p;
}

}  // namespace mdlxf::symprog
