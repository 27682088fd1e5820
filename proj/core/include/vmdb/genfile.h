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

// Meta-database file generation: full historical versions and incremental
// slices, field-masked, exported through the table's parser and split by a
// stable hash of the entry id. Artifacts are served through the cache.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vmdb/catalog.h"
#include "vmdb/model.h"
#include "vmdb/plugins.h"
#include "vmdb/vstore.h"

namespace vmdb {

struct GeneratedArtifact {
    GenerationSpec spec;
    std::string key;
    std::vector<fs::path> files;           // one per split
    std::optional<fs::path> deletions_file;  // increments only
    std::vector<EntryId> deletions;
    std::uint64_t entry_count = 0;
    std::uint64_t byte_size = 0;  // split files plus sidecar
    std::uint64_t excluded_incomplete = 0;
    std::uint64_t residues = 0;  // summed length of the parser's sequence field
    bool cache_hit = false;
};

struct GenerateOptions {
    /// Turns silent exclusion of incomplete entries into kIncomplete.
    bool strict = false;
    std::string run_id;
};

class Generator {
public:
    Generator(const Store& store, Cache& cache, ProvenanceLog* log = nullptr,
              const PluginRegistry& registry = PluginRegistry::global());

    /// Cache-aware front door. A hit performs no store scan.
    GeneratedArtifact generate(const GenerationSpec& spec, const GenerateOptions& options = {});

    GeneratedArtifact get_version(const std::string& table, Seq to_seq, const FieldMask& mask,
                                  const std::string& format, std::uint32_t splits = 1,
                                  const GenerateOptions& options = {});
    GeneratedArtifact get_increment(const std::string& table, Seq from_seq, Seq to_seq,
                                    const FieldMask& mask, const std::string& format,
                                    std::uint32_t splits = 1, const GenerateOptions& options = {});
    GeneratedArtifact get_version_labeled(const std::string& table, const std::string& label,
                                          const FieldMask& mask, const std::string& format,
                                          std::uint32_t splits = 1,
                                          const GenerateOptions& options = {});

    /// Generates without touching the cache, writing `<dir>/<key>.p<k>` and,
    /// for increments, `<dir>/<key>.deleted`.
    GeneratedArtifact render(const GenerationSpec& spec, const fs::path& dir, bool strict = false) const;

    /// Residues of entries present at `seq` and complete under `mask`.
    std::uint64_t measure_residues(const std::string& table, Seq seq, const FieldMask& mask) const;

    /// Throws the errors generation would: range, mask and format checks.
    void check(const GenerationSpec& spec) const;

    const Store& store() const { return store_; }
    const PluginRegistry& registry() const { return registry_; }

private:
    const Store& store_;
    Cache& cache_;
    ProvenanceLog* log_;
    const PluginRegistry& registry_;
};

/// Reads a deletion sidecar: one id per line.
std::vector<EntryId> read_deletions(const fs::path& path);

}  // namespace vmdb
