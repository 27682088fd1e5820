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

#include <array>
#include <string>
#include <string_view>

namespace vmdb::blast {

/// Column order of 12-column tabular BLAST output.
inline constexpr std::array<std::string_view, 12> kColumns = {
    "qseqid", "sseqid", "pident", "length", "mismatch", "gapopen",
    "qstart", "qend",   "sstart", "send",   "evalue",   "bitscore"};

/// Record identity: (qseqid, sseqid, qstart, sstart) joined by tabs. A single
/// query can hit one subject several times, so qseqid alone is not unique.
std::string identity_key(std::string_view qseqid, std::string_view sseqid, std::string_view qstart,
                         std::string_view sstart);

}  // namespace vmdb::blast
