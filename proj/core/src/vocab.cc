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

#include "mdlxf/vocab.h"

#include "mdlxf/common.h"

namespace mdlxf {

std::vector<int> Vocabulary::Preprocess(const std::vector<int>& x) const {
  std::vector<int> ids;
  ids.reserve(x.size() + num_prompts + 3);
  ids.push_back(start());
  if (layout == Layout::kPrompted) {
    for (int i = 0; i < num_prompts; ++i) ids.push_back(prompt(i));
    ids.push_back(sep());
  }
  for (int t : x) {
    if (t < 0 || t >= num_tokens)
      throw ValidationError("unknown input token " + std::to_string(t));
    ids.push_back(t);
  }
  ids.push_back(end());
  return ids;
}

std::string Vocabulary::TokenLabel(int id) const {
  if (id < num_tokens) return std::to_string(id);
  if (id == start()) return "START";
  if (id == sep()) return "SEP";
  if (id == end()) return "END";
  return "p" + std::to_string(id - num_tokens - 3 + 1);
}

std::vector<int> TokensFromString(const std::string& text) {
  std::vector<int> out;
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      out.push_back(c - '0');
    } else if (c >= 'a' && c <= 'z') {
      out.push_back(10 + c - 'a');
    } else if (c != ' ' && c != ',') {
      throw ValidationError(std::string("bad token character '") + c + "'");
    }
  }
  return out;
}

std::string TokensToString(const std::vector<int>& tokens) {
  std::string s;
  for (int t : tokens)
    s.push_back(t < 10 ? static_cast<char>('0' + t)
                       : static_cast<char>('a' + t - 10));
  return s;
}

}  // namespace mdlxf
