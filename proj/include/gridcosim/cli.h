// Copyright 2026 The gridcosim Authors.
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

#ifndef GRIDCOSIM_CLI_H_
#define GRIDCOSIM_CLI_H_

#include <ostream>

namespace gridcosim {

// Exit codes of the command-line front end.
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitModel = 3,
  kExitSolver = 4,
  kExitIo = 5,
};

// Entry point behind the gridcosim binary: run | metric | route | validate.
// The one-line key=value summary goes to `out`, diagnostics to `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace gridcosim

#endif  // GRIDCOSIM_CLI_H_
