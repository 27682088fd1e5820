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

// Merging a tool's output over an increment into its output over the
// previous full version.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/genfile.h"
#include "vmdb/model.h"

namespace vmdb {

enum class MergeStrategy { kAppend, kAppendWithCorrection };

std::string_view to_string(MergeStrategy s);

/// E-values scale linearly with database size. Partial records were scored
/// against `partial_db_letters` and are rescaled to `full_db_letters`.
/// When `previous_db_letters` is set, carried-over records are rescaled from
/// that size as well.
struct EValueCorrection {
    std::uint64_t full_db_letters = 0;
    std::uint64_t partial_db_letters = 0;
    std::optional<std::uint64_t> previous_db_letters;

    /// Throws kPlan unless full > 0 and partial <= full.
    void validate() const;
};

struct MergePlan {
    std::string format = "blast-tab";
    MergeStrategy strategy = MergeStrategy::kAppend;
    /// Subjects deleted in the window; their records are dropped.
    std::vector<EntryId> deletions;
    /// Subjects present in the increment; their previous records are
    /// superseded by whatever the partial run produced for them.
    std::vector<EntryId> replaced;
    std::optional<EValueCorrection> correction;

    void validate() const;
};

/// e * full / partial. Throws kValue for non-finite or negative e and kPlan
/// when partial is zero.
double correct_evalue(double e, const EValueCorrection& corr);
/// e * full / previous, for records carried over from the previous output.
double rescale_previous_evalue(double e, const EValueCorrection& corr);

struct MergeStats {
    std::uint64_t previous_records = 0;
    std::uint64_t partial_records = 0;
    std::uint64_t dropped_deleted = 0;
    std::uint64_t dropped_replaced = 0;
    std::uint64_t superseded = 0;
    std::uint64_t output_records = 0;
};

/// Pure merge of two outputs. BLAST-tab output is sorted by record identity;
/// the "lines" format is plain concatenation.
std::string merge_outputs(std::string_view previous, std::string_view partial, const MergePlan& plan,
                          MergeStats* stats = nullptr, std::string_view previous_name = "previous",
                          std::string_view partial_name = "partial");

MergeStats merge_files(const fs::path& previous, const fs::path& partial, const MergePlan& plan,
                       const fs::path& out);

/// Plan for merging output computed over `increment` (an INCREMENT spec)
/// into output computed over the full version at its from_seq. Deletions
/// come from the increment's sidecar, letters from the generated artifacts.
MergePlan build_merge_plan(Generator& generator, const GenerationSpec& increment,
                           const std::string& format = "blast-tab", const GenerateOptions& options = {});

}  // namespace vmdb
