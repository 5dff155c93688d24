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

#ifndef MDLXF_VOCAB_H_
#define MDLXF_VOCAB_H_

#include <string>
#include <vector>

namespace mdlxf {

// Token numbering for |V| input tokens and r_s prompt tokens: inputs are
// 0..|V|-1, then START, SEP, END, then p_1..p_{r_s}.
struct Vocabulary {
  int num_tokens = 2;
  int num_prompts = 0;
  // kPrompted is START, p_1..p_{r_s}, SEP, x, END. kTape is START, x, END.
  enum class Layout { kPrompted, kTape } layout = Layout::kPrompted;

  int start() const { return num_tokens; }
  int sep() const { return num_tokens + 1; }
  int end() const { return num_tokens + 2; }
  int prompt(int i) const { return num_tokens + 3 + i; }  // i from 0
  int size() const { return num_tokens + 3 + num_prompts; }
  bool is_prompt(int id) const { return id >= num_tokens + 3; }

  // Throws ValidationError on tokens outside [0, |V|).
  std::vector<int> Preprocess(const std::vector<int>& x) const;
  // SEP for prompted layouts; -1 for tapes (every position is read).
  int ReadoutPosition() const {
    return layout == Layout::kPrompted ? num_prompts + 1 : -1;
  }
  std::string TokenLabel(int id) const;
};

// Characters '0'-'9' and 'a'-'z' map to token ids 0-35.
std::vector<int> TokensFromString(const std::string& text);
std::string TokensToString(const std::vector<int>& tokens);

}  // namespace mdlxf

#endif  // MDLXF_VOCAB_H_
