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

#ifndef MDLXF_WEIGHTS_IO_H_
#define MDLXF_WEIGHTS_IO_H_

#include <string>

#include <nlohmann/json.hpp>

#include "mdlxf/transformer.h"

// Weight container: 8-byte magic, little-endian u64 header length, a JSON
// header naming each array with its shape, then little-endian f64 data in
// row-major order.
namespace mdlxf::weights_io {

nlohmann::json ConfigToJson(const transformer::ModelConfig& config);
transformer::ModelConfig ConfigFromJson(const nlohmann::json& j);

void Save(const std::string& path, const transformer::TransformerWeights& w,
          const transformer::ModelConfig& config,
          const nlohmann::json& extra = nlohmann::json::object());

struct Loaded {
  transformer::TransformerWeights weights;
  transformer::ModelConfig config;
  nlohmann::json extra;
};

// Throws FormatError on a malformed container.
Loaded Load(const std::string& path);

}  // namespace mdlxf::weights_io

#endif  // MDLXF_WEIGHTS_IO_H_
