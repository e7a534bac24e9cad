// Copyright 2026 The DepthFuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEPTHFUSE_TOOLS_CLI_H_
#define DEPTHFUSE_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace depthfuse::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,        // validation or I/O failure
  kExitNotConverged = 2,   // output written, solver flagged
  kExitEmptyMask = 3,      // ground truth has no valid pixel
};

// Runs `depthfuse <subcommand> ...`; args excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace depthfuse::cli

#endif  // DEPTHFUSE_TOOLS_CLI_H_
