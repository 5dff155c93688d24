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


#ifndef MDLXF_TOOLS_CLI_H_
#define MDLXF_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mdlxf::cli {

// Parses argv and runs one subcommand. Returns the process exit code: 0 on
// success, 1 on a runtime error or an error row, CLI11's code on usage
// errors. Results go to `out`, diagnostics to `err`.
int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err);

}  // namespace mdlxf::cli

#endif  // MDLXF_TOOLS_CLI_H_
