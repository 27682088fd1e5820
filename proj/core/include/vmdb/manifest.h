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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/codec.h"
#include "vmdb/model.h"
#include "vmdb/segment.h"

namespace vmdb {

struct ReleaseCounts {
    std::uint64_t added = 0;
    std::uint64_t updated = 0;
    std::uint64_t unchanged = 0;
    std::uint64_t deleted = 0;

    bool operator==(const ReleaseCounts&) const = default;
};

struct ReleaseRecord {
    Seq seq = 0;
    std::string label;
    std::string wall_time;
    SegmentInfo segment;
    ReleaseCounts counts;
};

/// Per-table commit record. The table's visible state is exactly the
/// releases listed here; segment files not referenced are ignored.
struct TableManifest {
    static constexpr int kFormatVersion = 1;

    std::string name;
    std::string schema_note;
    std::string parser;               // bound parser plugin id, may be empty
    std::vector<std::string> fields;  // registered field set
    Codec codec = Codec::kDeflate;
    std::uint64_t row_count = 0;      // distinct rows ever written
    std::vector<ReleaseRecord> releases;

    Seq head_seq() const { return static_cast<Seq>(releases.size()); }

    std::string serialize() const;
    /// Parses and verifies the trailing checksum.
    static TableManifest parse(std::string_view text);
};

}  // namespace vmdb
