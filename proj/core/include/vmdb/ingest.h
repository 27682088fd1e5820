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

// Release ingestion with field-aware change detection.
//
// A release file is parsed as a stream, entries are hash-partitioned by id and
// sorted (spilling to disk past the memory budget), then merge-joined against
// the previous release read back from the store. Only changed field cells are
// written; every entry present in the file gets an EXISTS mark.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/io.h"
#include "vmdb/manifest.h"
#include "vmdb/model.h"
#include "vmdb/plugins.h"
#include "vmdb/vstore.h"

namespace vmdb {

class ProvenanceLog;

struct IngestReport {
    std::string table;
    Seq seq = 0;
    std::string label;
    ReleaseCounts counts;
    std::uint64_t cells_written = 0;  // field cells, excluding EXISTS marks
    std::uint64_t exists_marks = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t skipped_bytes = 0;  // header/comment bytes outside entries
    double duration_seconds = 0;
};

struct IngestOptions {
    std::uint32_t workers = 1;
    /// Parsed entries buffered in memory before sorted runs are spilled.
    std::size_t memory_budget = 64u << 20;
    /// Overrides the table's bound parser when non-empty.
    std::string parser;
    std::string run_id;
};

class Ingester {
public:
    explicit Ingester(Store& store, const PluginRegistry& registry = PluginRegistry::global(),
                      ProvenanceLog* log = nullptr);

    /// Creates a table bound to `parser`. An empty field set means the
    /// parser's default fields.
    TableHandle register_table(const std::string& name, const std::string& parser,
                               std::vector<std::string> field_set = {},
                               const std::string& schema_note = "");

    IngestReport add_release(const std::string& table, ByteSource& source, const std::string& label,
                             const IngestOptions& options = {});
    IngestReport add_release_file(const std::string& table, const fs::path& path,
                                  const std::string& label, const IngestOptions& options = {});
    IngestReport add_release_bytes(const std::string& table, std::string_view bytes,
                                   const std::string& label, const IngestOptions& options = {});

    /// add_release with an explicit parser and worker count. The resulting
    /// store state does not depend on `workers`.
    IngestReport ingest_partitioned(const std::string& table, ByteSource& source,
                                    const std::string& parser, const std::string& label,
                                    std::uint32_t workers);

private:
    Store& store_;
    const PluginRegistry& registry_;
    ProvenanceLog* log_;
};

/// The row delta a release writes for `entry`, given the row's history up to
/// the previous release (`prev_seq`). Also reports the entry's diff class.
RowDelta diff_entry(const ParsedEntry& entry, const VersionedRow* history, Seq prev_seq,
                    DiffClass& klass);

}  // namespace vmdb
