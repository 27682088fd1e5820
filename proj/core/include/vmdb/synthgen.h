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

// Synthetic release sequences and the brute-force diff oracle.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/io.h"
#include "vmdb/manifest.h"
#include "vmdb/model.h"
#include "vmdb/plugins.h"

namespace vmdb {

/// Per-release churn, as fractions of the entries alive in the previous
/// release. Counts are rounded down.
struct ChurnProfile {
    std::uint64_t n_entries = 1000;
    double p_new = 0.05;
    double p_update = 0.45;
    double p_delete = 0.01;
    std::uint64_t seed = 1;

    /// Throws kValidation for fractions outside [0,1] or an update plus
    /// delete share above 1.
    void validate() const;
};

struct ChurnCounts {
    std::uint64_t added = 0;
    std::uint64_t updated = 0;
    std::uint64_t deleted = 0;
    std::uint64_t desc_changes = 0;
    std::uint64_t seq_changes = 0;
};

/// Streams a release sequence. Entry state is a few integers per id, so a
/// release of any size can be written without holding its text in memory.
class SynthGenerator {
public:
    explicit SynthGenerator(ChurnProfile profile, std::string format = "fasta");

    std::uint32_t release() const { return release_; }
    std::uint64_t alive() const { return alive_; }
    const ChurnCounts& last_churn() const { return last_; }
    const std::string& format() const { return format_; }

    /// Writes the current release.
    void write(FileWriter& out) const;
    void write_file(const fs::path& path) const;
    std::string render() const;

    /// Applies one release worth of churn.
    void advance();

    /// One entry rendered in the generator's format.
    std::string entry_text(std::uint64_t index) const;

private:
    struct State {
        std::uint32_t seq_version = 0;
        std::uint32_t desc_version = 0;
        bool alive = true;
    };

    template <typename Visit>
    void each_alive(Visit&& visit) const;
    double uniform();
    std::string sequence(std::uint64_t index, std::uint32_t version) const;
    std::string description(std::uint64_t index, std::uint32_t version) const;

    ChurnProfile profile_;
    std::string format_;
    std::mt19937_64 rng_;
    std::vector<State> entries_;
    std::uint64_t alive_ = 0;
    std::uint32_t release_ = 1;
    ChurnCounts last_;
};

std::string synth_entry_id(std::uint64_t index);

/// Writes releases r1..rk as `<dir>/r<i>.<fasta|dat>` and returns the paths.
std::vector<fs::path> generate_releases(const ChurnProfile& profile, std::uint32_t k,
                                        const std::string& format, const fs::path& dir);
/// Same releases, in memory.
std::vector<std::string> generate_release_texts(const ChurnProfile& profile, std::uint32_t k,
                                                const std::string& format);

/// Full-file diff of two releases. Entries are compared field by field on
/// the masked fields, or on every field when no mask is given.
struct OracleDiff {
    std::map<std::string, DiffClass> classes;
    /// For entries present in the second file: fields written by a delta
    /// store. ADDED entries list all their fields.
    std::map<std::string, std::vector<std::string>> changed_fields;

    ReleaseCounts counts() const;
    std::uint64_t changed_cells() const;
    std::vector<std::string> ids(DiffClass c) const;
};

OracleDiff oracle_diff(std::string_view a, std::string_view b, const ParserPlugin& parser,
                       const std::optional<FieldMask>& mask = std::nullopt);
OracleDiff oracle_diff_files(const fs::path& a, const fs::path& b, const ParserPlugin& parser,
                             const std::optional<FieldMask>& mask = std::nullopt);

/// Parses a whole release into id -> fields. Throws kDuplicateId.
std::map<std::string, FieldMap> parse_release(std::string_view bytes, const ParserPlugin& parser);

}  // namespace vmdb
