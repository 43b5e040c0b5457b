// Copyright 2026 The dimmask Authors.
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

#ifndef DIMMASK_TOOLS_CLI_HPP
#define DIMMASK_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dimmask::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kRuntimeError = 2;

/// Runs one subcommand; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dimmask::cli

#endif  // DIMMASK_TOOLS_CLI_HPP
