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

// Embedded versioned table store.
//
// Each table is a directory holding one immutable segment per release plus a
// MANIFEST that is rewritten atomically after the segment is durable. A
// release is visible iff the manifest lists it, so a crash between the two
// steps leaves the table at its previous head.
//
// Storage follows delta semantics: a release's segment contains only the
// field cells that changed in that release plus one EXISTS mark per entry
// present in it. Nothing is ever rewritten or deleted.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/codec.h"
#include "vmdb/io.h"
#include "vmdb/manifest.h"
#include "vmdb/model.h"
#include "vmdb/segment.h"

namespace vmdb {

struct Cell {
    Seq stamp = 0;
    std::optional<std::string> value;  // nullopt: field removed at this stamp

    bool operator==(const Cell&) const = default;
};

/// A row's history as seen through some window of releases.
struct VersionedRow {
    EntryId id;
    std::map<std::string, std::vector<Cell>> cells;  // per field, ascending stamp
    std::vector<Seq> exists_stamps;                  // ascending

    bool exists_at(Seq seq) const;
    /// Latest value per field with stamp <= `at`, regardless of whether the row
    /// exists at `at`. Restricted to `mask` when given.
    FieldMap fields_at(Seq at, const FieldMask* mask = nullptr) const;
    /// True if some (masked) field has a cell with stamp in [from, to].
    bool has_cell_in(Seq from, Seq to, const FieldMask* mask = nullptr) const;

    bool operator==(const VersionedRow&) const = default;
};

struct TableHandle {
    std::string name;
    std::string schema_note;
    Seq head_seq = 0;
    std::uint64_t row_count = 0;
    std::string parser;
    std::vector<std::string> fields;

    bool operator==(const TableHandle&) const = default;
};

struct WriteStats {
    std::uint64_t rows = 0;
    std::uint64_t field_cells = 0;
    std::uint64_t exists_marks = 0;
    std::uint64_t raw_bytes = 0;
    std::uint64_t bytes_written = 0;  // segment file size, after compression
};

struct CellWrite {
    EntryId id;
    std::string field;
    std::optional<std::string> value;
};

/// Half-open row-key range; an empty `end` is unbounded.
struct KeyRange {
    std::string begin;
    std::string end;

    bool contains(std::string_view key) const {
        return key >= begin && (end.empty() || key < end);
    }
};

struct StoreOptions {
    Codec codec = Codec::kDeflate;
    std::size_t block_bytes = 64 * 1024;
    bool sync = true;
};

class Store;

/// Merges the segments of releases 1..to_seq into one ascending stream of
/// rows, each carrying its full history up to to_seq.
class RowCursor {
public:
    bool next(VersionedRow& row);

private:
    friend class Store;
    struct Source {
        Seq seq;
        SegmentReader::Iterator it;
        RowDelta head;
        bool valid = false;
    };
    RowCursor(std::vector<Source> sources, std::optional<KeyRange> range);

    std::vector<Source> sources_;
    std::optional<KeyRange> range_;
};

/// Exclusive writer for one release of one table. Destroying it without
/// commit() discards the partial segment.
class ReleaseWriter {
public:
    ReleaseWriter(ReleaseWriter&&) noexcept;
    ReleaseWriter& operator=(ReleaseWriter&&) = delete;
    ~ReleaseWriter();

    Seq seq() const { return seq_; }
    /// Rows must arrive in strictly ascending key order.
    void add(const RowDelta& row);
    /// Makes the release visible. `new_rows` counts rows with no earlier history.
    WriteStats commit(const ReleaseCounts& counts, std::uint64_t new_rows);

private:
    friend class Store;
    ReleaseWriter(const Store& store, std::string table, Seq seq, std::string label, FileLock lock);

    const Store* store_;
    std::string table_;
    Seq seq_;
    std::string label_;
    FileLock lock_;
    fs::path segment_path_;
    std::unique_ptr<SegmentWriter> writer_;
    std::set<std::string> fields_;
    bool committed_ = false;
};

class Store {
public:
    explicit Store(fs::path root, StoreOptions options = {});

    const fs::path& root() const { return root_; }
    const StoreOptions& options() const { return options_; }

    TableHandle create_table(const std::string& name, const std::string& schema_note = "",
                             const std::string& parser = "",
                             const std::vector<std::string>& fields = {});
    TableHandle table(const std::string& name) const;
    bool has_table(const std::string& name) const;
    std::vector<std::string> tables() const;
    TableManifest manifest(const std::string& name) const;

    /// Label lookup first, then a decimal seq.
    Seq resolve_version(const std::string& table, std::string_view label_or_seq) const;

    /// Opens the single writer for release `seq`, which must be head + 1.
    /// Fails with kLockHeld if another writer holds the table.
    ReleaseWriter begin_release(const std::string& table, Seq seq, std::string label = "");

    /// Writes one release from an in-memory batch. Every row with cells must
    /// also carry an EXISTS mark.
    WriteStats put_cells(const std::string& table, Seq seq, std::span<const CellWrite> cells,
                         std::span<const EntryId> exists, std::string label = "");

    RowCursor cursor(const std::string& table, Seq to_seq,
                     std::optional<KeyRange> range = std::nullopt) const;

    /// Visits, in row-key order, every row with a masked field cell stamped in
    /// [from_seq, to_seq]. Visited rows are restricted to that window.
    void scan_rows(const std::string& table, Seq from_seq, Seq to_seq, const FieldMask& mask,
                   const std::optional<KeyRange>& range,
                   const std::function<void(const VersionedRow&)>& visit) const;
    std::vector<VersionedRow> scan_rows(const std::string& table, Seq from_seq, Seq to_seq,
                                        const FieldMask& mask,
                                        const std::optional<KeyRange>& range = std::nullopt) const;

    /// Point-in-time reconstruction; nullopt if the row is absent at `at_seq`.
    std::optional<FieldMap> materialize_row(const std::string& table, const EntryId& id,
                                            Seq at_seq, const FieldMask* mask = nullptr) const;
    /// The row's full history up to `to_seq`, if it has any.
    std::optional<VersionedRow> row_history(const std::string& table, const EntryId& id,
                                            Seq to_seq) const;

    std::uint32_t put_blob(const std::string& name, std::string_view bytes);
    std::string get_blob(const std::string& name, std::uint32_t version) const;
    std::uint32_t blob_head(const std::string& name) const;

    /// Bytes of the table's manifest plus every committed segment.
    std::uint64_t table_bytes(const std::string& table) const;
    /// Reads every block of every committed segment.
    void verify_table(const std::string& table) const;

    std::uint64_t scan_count() const { return scans_.load(); }

    fs::path table_dir(const std::string& name) const { return root_ / "tables" / name; }

private:
    friend class ReleaseWriter;
    void commit_release(const std::string& table, const ReleaseRecord& record,
                        std::uint64_t new_rows, const std::set<std::string>& fields) const;
    std::vector<std::shared_ptr<SegmentReader>> open_segments(const TableManifest& m, Seq to_seq) const;
    void check_range(const TableManifest& m, Seq from_seq, Seq to_seq) const;

    fs::path root_;
    StoreOptions options_;
    mutable std::atomic<std::uint64_t> scans_{0};
};

}  // namespace vmdb
