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

// Shared vocabulary of the engine: releases, entries, masks, diff classes and
// generation requests. Everything here is an immutable value type.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vmdb {

/// Dense per-table release ordinal, starting at 1. Zero means "no release".
using Seq = std::uint32_t;

struct VersionStamp {
    std::string table;
    Seq seq = 0;
    std::string label;
    std::string wall_time;  // informational, ISO-8601 UTC

    bool operator==(const VersionStamp&) const = default;
};

/// Table-unique row key. Ordering is lexicographic over the key bytes.
struct EntryId {
    std::string key;

    auto operator<=>(const EntryId&) const = default;
};

using FieldMap = std::map<std::string, std::string>;

struct ParsedEntry {
    EntryId id;
    FieldMap fields;
    bool complete = true;

    bool operator==(const ParsedEntry&) const = default;
};

/// The fields a downstream tool reads. `required` must be a subset of
/// `fields`; an entry lacking a required field is not emitted.
struct FieldMask {
    std::set<std::string> fields;
    std::set<std::string> required;

    /// Validating constructor.
    static FieldMask make(std::set<std::string> fields, std::set<std::string> required = {});
    /// Parses "f1,f2:required,...". Tokens suffixed with ":required" join both sets.
    static FieldMask parse(std::string_view text);

    void validate() const;
    bool contains(std::string_view field) const { return fields.find(std::string(field)) != fields.end(); }

    /// "f1,f2|r1": sorted fields, a bar, then the sorted required subset.
    std::string canonical() const;
    /// First 8 hex digits of a stable 64-bit hash over canonical().
    std::string hash8() const;

    bool operator==(const FieldMask&) const = default;
};

enum class DiffClass { kAdded, kUpdated, kUnchanged, kDeleted };

std::string_view to_string(DiffClass c);

enum class GenerationKind { kFull, kIncrement };

std::string_view to_string(GenerationKind k);

/// A canonical description of a generation request; the cache key is derived
/// from it. FULL requests always start at seq 1.
struct GenerationSpec {
    std::string table;
    GenerationKind kind = GenerationKind::kFull;
    Seq from_seq = 1;
    Seq to_seq = 1;
    FieldMask mask;
    std::string format;
    std::uint32_t splits = 1;

    static GenerationSpec full(std::string table, Seq to_seq, FieldMask mask, std::string format,
                               std::uint32_t splits = 1);
    static GenerationSpec increment(std::string table, Seq from_seq, Seq to_seq, FieldMask mask,
                                    std::string format, std::uint32_t splits = 1);

    void validate() const;

    bool operator==(const GenerationSpec&) const = default;
};

/// `<table>.<full|incr>.<from>-<to>.<maskhash>.<format>.s<splits>`
std::string canonical_key(const GenerationSpec& spec);

/// Everything recoverable from a cache key. The mask itself is only present
/// as its hash.
struct KeyParts {
    std::string table;
    GenerationKind kind = GenerationKind::kFull;
    Seq from_seq = 0;
    Seq to_seq = 0;
    std::string mask_hash;
    std::string format;
    std::uint32_t splits = 0;
};

std::optional<KeyParts> parse_key(std::string_view key);

/// Masked fields whose presence or bytes differ between the two maps, sorted.
std::vector<std::string> differing_fields(const FieldMap& a, const FieldMap& b,
                                          const std::set<std::string>& fields);

/// Field-aware change classification. A null pointer means the entry is absent
/// from that release. Differences outside the mask are ignored.
DiffClass classify(const FieldMap* old_entry, const FieldMap* new_entry, const FieldMask& mask);

bool valid_table_name(std::string_view name);
bool valid_format_id(std::string_view id);

}  // namespace vmdb
