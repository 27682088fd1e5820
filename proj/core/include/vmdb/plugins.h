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

// Parser plugin framework. A plugin teaches the engine one flat-file format
// through six operations: find entry boundaries, split an entry into fields,
// compare two versions of an entry, check completeness for a tool, turn an
// entry into a store write batch, and export fields back to text.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/io.h"
#include "vmdb/model.h"
#include "vmdb/vstore.h"

namespace vmdb {

/// Line-anchored entry boundary rules.
struct EntryBoundary {
    enum class Mode {
        kStartMarker,  // an entry starts at each line beginning with `marker`
        kEndMarker,    // an entry ends with a line equal to `marker`
        kLine,         // every line is an entry
    };
    Mode mode = Mode::kLine;
    std::string marker;
    std::string comment_prefix;  // skipped when outside an entry
};

struct EntrySlice {
    std::string bytes;
    std::uint64_t offset = 0;
};

/// Streams raw entries out of a byte source. Memory use is bounded by the
/// largest single entry.
class EntryReader {
public:
    EntryReader(ByteSource& src, EntryBoundary boundary);

    /// Throws kMalformedInput for an unterminated final entry.
    bool next(EntrySlice& slice);

    std::uint64_t skipped_bytes() const { return skipped_bytes_; }
    std::uint64_t skipped_lines() const { return skipped_lines_; }

private:
    void skip(std::string_view line);

    LineReader lines_;
    EntryBoundary boundary_;
    std::string pending_;  // kStartMarker: the start line of the next entry
    std::uint64_t pending_offset_ = 0;
    bool has_pending_ = false;
    std::uint64_t skipped_bytes_ = 0;
    std::uint64_t skipped_lines_ = 0;
};

class ParserPlugin {
public:
    virtual ~ParserPlugin() = default;

    virtual std::string_view format_id() const = 0;
    /// The field set a table bound to this parser registers by default.
    virtual std::vector<std::string> default_fields() const = 0;
    /// Fields an entry must carry to be usable at all.
    virtual std::vector<std::string> required_fields() const = 0;
    /// Field holding residues, used for database-size accounting.
    virtual std::optional<std::string> sequence_field() const { return std::nullopt; }
    /// Formats export_entry() accepts besides format_id() and "native".
    virtual std::vector<std::string> export_formats() const { return {}; }

    virtual EntryBoundary boundary() const = 0;
    EntryReader entry_bounds(ByteSource& src) const { return EntryReader(src, boundary()); }

    /// Throws kMalformedInput when the entry has no id.
    virtual ParsedEntry split_entry(std::string_view raw) const = 0;

    /// Differing masked fields, sorted; empty means equal.
    virtual std::vector<std::string> compare_entries(const ParsedEntry& a, const ParsedEntry& b,
                                                     const FieldMask& mask) const;

    virtual bool is_complete(const ParsedEntry& e, const FieldMask& mask) const;

    virtual std::vector<CellWrite> to_store_batch(const ParsedEntry& e) const;

    /// Throws kFormat for unsupported formats.
    virtual std::string export_entry(const EntryId& id, const FieldMap& fields,
                                     std::string_view format) const = 0;

    bool supports_export(std::string_view format) const;
    /// export_entry(split_entry(raw)) in the native format.
    std::string canonical(std::string_view raw) const;

protected:
    bool has_required(const FieldMap& fields) const;
};

class PluginRegistry {
public:
    using Factory = std::function<std::unique_ptr<ParserPlugin>()>;

    /// Process-wide registry with the built-in parsers registered.
    static PluginRegistry& global();

    void add(const std::string& id, Factory factory);
    /// Throws kFormat for an unknown id.
    std::shared_ptr<const ParserPlugin> get(std::string_view id) const;
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, Factory, std::less<>> factories_;
    mutable std::map<std::string, std::shared_ptr<const ParserPlugin>, std::less<>> instances_;
};

std::unique_ptr<ParserPlugin> make_fasta_plugin();
std::unique_ptr<ParserPlugin> make_dat_plugin();
std::unique_ptr<ParserPlugin> make_blast_tab_plugin();

/// Lowercase scientific rendering used for e-values.
std::string format_evalue(double value);
/// Keeps an already-lowercase scientific string as is; re-renders other numbers.
std::string canonical_evalue(std::string_view text);

/// Wraps `seq` into lines of `width` characters, each ending in '\n'.
std::string wrap_sequence(std::string_view seq, std::size_t width = 60);

}  // namespace vmdb
