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

#include "mdlxf/weights_io.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mdlxf::weights_io {
namespace {

constexpr char kMagic[8] = {'M', 'D', 'L', 'X', 'F', 'W', '1', '\0'};

void PutU64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t GetU64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw FormatError("truncated weight container");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void PutF64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  PutU64(os, bits);
}

double GetF64(std::istream& is) {
  const std::uint64_t bits = GetU64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

nlohmann::json ConfigToJson(const transformer::ModelConfig& c) {
  return {{"num_layers", c.num_layers},
          {"num_heads", c.num_heads},
          {"model_dim", c.model_dim},
          {"head_dim", c.head_dim},
          {"hidden_dim", c.hidden_dim},
          {"num_outputs", c.num_outputs},
          {"num_tokens", c.vocab.num_tokens},
          {"num_prompts", c.vocab.num_prompts},
          {"layout", c.vocab.layout == Vocabulary::Layout::kTape ? "tape"
                                                                 : "prompted"},
          {"normalization", transformer::NormalizationName(c.normalization)},
          {"attention_scale", c.attention_scale}};
}

transformer::ModelConfig ConfigFromJson(const nlohmann::json& j) {
  try {
    transformer::ModelConfig c;
    c.num_layers = j.at("num_layers").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.model_dim = j.at("model_dim").get<int>();
    c.head_dim = j.at("head_dim").get<int>();
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.num_outputs = j.at("num_outputs").get<int>();
    c.vocab.num_tokens = j.at("num_tokens").get<int>();
    c.vocab.num_prompts = j.at("num_prompts").get<int>();
    c.vocab.layout = j.value("layout", "prompted") == "tape"
                         ? Vocabulary::Layout::kTape
                         : Vocabulary::Layout::kPrompted;
    c.normalization = transformer::NormalizationFromString(
        j.value("normalization", "tanh"));
    c.attention_scale = j.value("attention_scale", 0.0);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model config: ") + e.what());
  }
}

void Save(const std::string& path, const transformer::TransformerWeights& w,
          const transformer::ModelConfig& config, const nlohmann::json& extra) {
  transformer::CheckShapes(w, config);
  nlohmann::json header;
  header["config"] = ConfigToJson(config);
  header["extra"] = extra;
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    const auto& a = w.Array(name);
    arrays.push_back({{"name", name}, {"rows", a.rows()}, {"cols", a.cols()}});
  }
  header["arrays"] = arrays;
  nlohmann::json labels = nlohmann::json::array();
  for (int id = 0; id < config.vocab.num_tokens + 3; ++id)
    labels.push_back(config.vocab.TokenLabel(id));
  header["embed_row_labels"] = labels;
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os.write(kMagic, 8);
  PutU64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    const auto& a = w.Array(name);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) PutF64(os, a(r, c));
  }
  if (!os) throw Error("write to '" + path + "' failed");
}

Loaded Load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("'" + path + "' is not a weight container");
  const std::uint64_t len = GetU64(is);
  if (len > (1u << 30)) throw FormatError("implausible header length");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len)))
    throw FormatError("truncated header");
  Loaded out;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad header: ") + e.what());
  }
  out.config = ConfigFromJson(header.at("config"));
  out.extra = header.value("extra", nlohmann::json::object());
  out.weights = transformer::TransformerWeights::Zeros(out.config);
  for (const auto& entry : header.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    auto& a = out.weights.Array(name);
    if (entry.at("rows").get<Eigen::Index>() != a.rows() ||
        entry.at("cols").get<Eigen::Index>() != a.cols())
      throw FormatError("array '" + name + "' disagrees with the config");
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = GetF64(is);
  }
  return out;
}

}  // namespace mdlxf::weights_io
