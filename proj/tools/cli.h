// Copyright 2026 The vmdb Authors
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

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vmdb::cli {

/// Runs one `vmdb` invocation. `args` excludes the program name. Returns
/// the process exit code: 0 ok, 2 not found, 3 invalid request, 4 I/O or
/// corruption, 5 table locked.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vmdb::cli
