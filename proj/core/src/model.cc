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

#include "vmdb/model.h"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "vmdb/encoding.h"
#include "vmdb/errors.h"

namespace vmdb {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kAlreadyExists: return "already-exists";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kSequencing: return "sequencing";
    case ErrorCode::kDuplicateCell: return "duplicate-cell";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kMalformedInput: return "malformed-input";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kMask: return "mask";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kPlan: return "plan";
    case ErrorCode::kMerge: return "merge";
    case ErrorCode::kValue: return "value";
    case ErrorCode::kIncomplete: return "incomplete";
    case ErrorCode::kLockHeld: return "lock-held";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kCorruption: return "corruption";
    }
    return "unknown";
}

std::string_view to_string(DiffClass c) {
    switch (c) {
    case DiffClass::kAdded: return "ADDED";
    case DiffClass::kUpdated: return "UPDATED";
    case DiffClass::kUnchanged: return "UNCHANGED";
    case DiffClass::kDeleted: return "DELETED";
    }
    return "?";
}

std::string_view to_string(GenerationKind k) {
    return k == GenerationKind::kFull ? "full" : "incr";
}

namespace {

bool is_field_char(char c) {
    return c != ',' && c != '|' && c != ':' && c != '\t' && c != '\n' && c != '\r' && c != ' ';
}

bool valid_field_name(std::string_view f) {
    return !f.empty() && std::all_of(f.begin(), f.end(), is_field_char);
}

template <typename T>
std::optional<T> parse_uint(std::string_view s) {
    T v{};
    if (s.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

FieldMask FieldMask::make(std::set<std::string> fields, std::set<std::string> required) {
    FieldMask m{std::move(fields), std::move(required)};
    m.validate();
    return m;
}

FieldMask FieldMask::parse(std::string_view text) {
    FieldMask m;
    for (auto token : split(text, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        bool req = false;
        if (auto colon = token.find(':'); colon != std::string_view::npos) {
            if (token.substr(colon + 1) != "required") {
                fail(ErrorCode::kMask, "unknown mask qualifier in '" + std::string(token) + "'");
            }
            token = token.substr(0, colon);
            req = true;
        }
        m.fields.emplace(token);
        if (req) m.required.emplace(token);
    }
    m.validate();
    return m;
}

void FieldMask::validate() const {
    if (fields.empty()) fail(ErrorCode::kMask, "field mask must name at least one field");
    for (const auto& f : fields) {
        if (!valid_field_name(f)) fail(ErrorCode::kMask, "invalid field name '" + f + "'");
    }
    for (const auto& r : required) {
        if (!fields.count(r)) {
            fail(ErrorCode::kMask, "required field '" + r + "' is not part of the mask");
        }
    }
}

std::string FieldMask::canonical() const {
    std::string out;
    for (const auto& f : fields) {
        if (!out.empty()) out += ',';
        out += f;
    }
    out += '|';
    bool first = true;
    for (const auto& r : required) {
        if (!first) out += ',';
        out += r;
        first = false;
    }
    return out;
}

std::string FieldMask::hash8() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(stable_hash(canonical())));
    return std::string(buf, 8);
}

GenerationSpec GenerationSpec::full(std::string table, Seq to_seq, FieldMask mask,
                                    std::string format, std::uint32_t splits) {
    return GenerationSpec{std::move(table), GenerationKind::kFull, 1, to_seq, std::move(mask),
                          std::move(format), splits};
}

GenerationSpec GenerationSpec::increment(std::string table, Seq from_seq, Seq to_seq,
                                         FieldMask mask, std::string format,
                                         std::uint32_t splits) {
    return GenerationSpec{std::move(table), GenerationKind::kIncrement, from_seq, to_seq,
                          std::move(mask), std::move(format), splits};
}

void GenerationSpec::validate() const {
    if (!valid_table_name(table)) fail(ErrorCode::kValidation, "invalid table name '" + table + "'");
    if (!valid_format_id(format)) fail(ErrorCode::kValidation, "invalid format id '" + format + "'");
    if (splits == 0) fail(ErrorCode::kValidation, "splits must be positive");
    if (to_seq < 1) fail(ErrorCode::kRange, "to_seq must be at least 1");
    if (kind == GenerationKind::kFull) {
        if (from_seq != 1) fail(ErrorCode::kValidation, "FULL generation must start at seq 1");
    } else {
        if (from_seq < 1 || from_seq >= to_seq) {
            fail(ErrorCode::kRange, "increment requires 1 <= from < to (got " +
                                        std::to_string(from_seq) + ", " + std::to_string(to_seq) + ")");
        }
    }
    mask.validate();
}

std::string canonical_key(const GenerationSpec& spec) {
    spec.validate();
    return spec.table + "." + std::string(to_string(spec.kind)) + "." +
           std::to_string(spec.from_seq) + "-" + std::to_string(spec.to_seq) + "." +
           spec.mask.hash8() + "." + spec.format + ".s" + std::to_string(spec.splits);
}

std::optional<KeyParts> parse_key(std::string_view key) {
    auto parts = split(key, '.');
    if (parts.size() != 6) return std::nullopt;
    KeyParts k;
    k.table = std::string(parts[0]);
    if (!valid_table_name(k.table)) return std::nullopt;
    if (parts[1] == "full") {
        k.kind = GenerationKind::kFull;
    } else if (parts[1] == "incr") {
        k.kind = GenerationKind::kIncrement;
    } else {
        return std::nullopt;
    }
    auto dash = parts[2].find('-');
    if (dash == std::string_view::npos) return std::nullopt;
    auto from = parse_uint<Seq>(parts[2].substr(0, dash));
    auto to = parse_uint<Seq>(parts[2].substr(dash + 1));
    if (!from || !to) return std::nullopt;
    k.from_seq = *from;
    k.to_seq = *to;
    if (parts[3].size() != 8) return std::nullopt;
    k.mask_hash = std::string(parts[3]);
    k.format = std::string(parts[4]);
    if (!valid_format_id(k.format)) return std::nullopt;
    if (parts[5].size() < 2 || parts[5][0] != 's') return std::nullopt;
    auto splits = parse_uint<std::uint32_t>(parts[5].substr(1));
    if (!splits || *splits == 0) return std::nullopt;
    k.splits = *splits;
    return k;
}

std::vector<std::string> differing_fields(const FieldMap& a, const FieldMap& b,
                                          const std::set<std::string>& fields) {
    std::vector<std::string> out;
    for (const auto& f : fields) {
        auto ia = a.find(f);
        auto ib = b.find(f);
        bool in_a = ia != a.end();
        bool in_b = ib != b.end();
        if (in_a != in_b || (in_a && ia->second != ib->second)) out.push_back(f);
    }
    return out;
}

DiffClass classify(const FieldMap* old_entry, const FieldMap* new_entry, const FieldMask& mask) {
    if (!old_entry && !new_entry) {
        fail(ErrorCode::kContract, "classify needs at least one present entry");
    }
    if (!old_entry) return DiffClass::kAdded;
    if (!new_entry) return DiffClass::kDeleted;
    return differing_fields(*old_entry, *new_entry, mask.fields).empty() ? DiffClass::kUnchanged
                                                                          : DiffClass::kUpdated;
}

bool valid_table_name(std::string_view name) {
    if (name.empty() || name.size() > 64) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '-';
    });
}

bool valid_format_id(std::string_view id) {
    if (id.empty() || id.size() > 32) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

}  // namespace vmdb
