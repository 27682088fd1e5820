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

// Named fault-injection points for crash-consistency testing. A failpoint is
// inert unless armed, either programmatically or through the VMDB_FAILPOINT
// environment variable (which terminates the process with exit status 77).

#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace vmdb::failpoint {

/// Between a release's segment becoming durable and its manifest commit.
inline constexpr std::string_view kAfterSegment = "release.after-segment";

void arm(std::string_view name, std::function<void()> action);
void disarm(std::string_view name);
void hit(std::string_view name);

}  // namespace vmdb::failpoint
