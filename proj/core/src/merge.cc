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

#include "vmdb/merge.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_set>

#include "vmdb/blast_tab.h"
#include "vmdb/errors.h"
#include "vmdb/plugins.h"

namespace vmdb {

namespace {

double parse_evalue(std::string_view text) {
    auto t = trim(text);
    double v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) {
        fail(ErrorCode::kValue, "unparseable e-value '" + std::string(text) + "'");
    }
    return v;
}

std::vector<ParsedEntry> parse_output(const ParserPlugin& plugin, std::string_view bytes, std::string_view name) {
    std::vector<ParsedEntry> out;
    auto src = memory_source(bytes);
    auto reader = plugin.entry_bounds(*src);
    EntrySlice slice;
    while (true) {
        try {
            if (!reader.next(slice)) break;
            out.push_back(plugin.split_entry(slice.bytes));
        } catch (const Error& e) {
            fail(ErrorCode::kMerge, std::string(name) + " at byte offset " + std::to_string(slice.offset) + ": " +
                                        e.what());
        }
    }
    return out;
}

std::string concat_lines(std::string_view a, std::string_view b) {
    std::string out(a);
    if (!out.empty() && out.back() != '\n' && !b.empty()) out += '\n';
    out.append(b);
    return out;
}

}  // namespace

std::string_view to_string(MergeStrategy s) {
    return s == MergeStrategy::kAppend ? "APPEND" : "APPEND_WITH_CORRECTION";
}

void EValueCorrection::validate() const {
    if (full_db_letters == 0) fail(ErrorCode::kPlan, "full database size must be positive");
    if (partial_db_letters > full_db_letters) {
        fail(ErrorCode::kPlan, "partial database (" + std::to_string(partial_db_letters) +
                                   " letters) is larger than the full database (" +
                                   std::to_string(full_db_letters) + ")");
    }
    if (previous_db_letters && *previous_db_letters == 0) {
        fail(ErrorCode::kPlan, "previous database size must be positive when given");
    }
}

void MergePlan::validate() const {
    if (!valid_format_id(format)) fail(ErrorCode::kPlan, "invalid merge format '" + format + "'");
    if (format != "blast-tab" && format != "lines") {
        fail(ErrorCode::kPlan, "no merge rule for format '" + format + "'");
    }
    if (strategy == MergeStrategy::kAppendWithCorrection) {
        if (!correction) fail(ErrorCode::kPlan, "APPEND_WITH_CORRECTION requires an e-value correction");
        if (format != "blast-tab") fail(ErrorCode::kPlan, "format '" + format + "' has no e-values to correct");
    }
    if (correction) correction->validate();
}

double correct_evalue(double e, const EValueCorrection& corr) {
    if (!std::isfinite(e) || e < 0) fail(ErrorCode::kValue, "e-value must be finite and non-negative");
    corr.validate();
    if (corr.partial_db_letters == 0) fail(ErrorCode::kPlan, "partial database size is zero");
    // Multiply first: exact whenever e * full is representable.
    return e * static_cast<double>(corr.full_db_letters) / static_cast<double>(corr.partial_db_letters);
}

double rescale_previous_evalue(double e, const EValueCorrection& corr) {
    if (!std::isfinite(e) || e < 0) fail(ErrorCode::kValue, "e-value must be finite and non-negative");
    corr.validate();
    if (!corr.previous_db_letters) return e;
    return e * static_cast<double>(corr.full_db_letters) / static_cast<double>(*corr.previous_db_letters);
}

std::string merge_outputs(std::string_view previous, std::string_view partial, const MergePlan& plan,
                          MergeStats* stats, std::string_view previous_name, std::string_view partial_name) {
    plan.validate();
    MergeStats local;
    MergeStats& st = stats ? *stats : local;
    st = MergeStats{};

    if (plan.format == "lines") {
        auto count = [](std::string_view s) {
            std::uint64_t n = 0;
            for (auto line : split(s, '\n')) n += !line.empty();
            return n;
        };
        st.previous_records = count(previous);
        st.partial_records = count(partial);
        st.output_records = st.previous_records + st.partial_records;
        return concat_lines(previous, partial);
    }

    auto plugin = PluginRegistry::global().get(plan.format);
    auto prev_records = parse_output(*plugin, previous, previous_name);
    auto part_records = parse_output(*plugin, partial, partial_name);
    st.previous_records = prev_records.size();
    st.partial_records = part_records.size();

    std::unordered_set<std::string> deleted;
    std::unordered_set<std::string> replaced;
    for (const auto& id : plan.deletions) deleted.insert(id.key);
    for (const auto& id : plan.replaced) replaced.insert(id.key);
    const bool correct = plan.strategy == MergeStrategy::kAppendWithCorrection;

    std::map<std::string, FieldMap> merged;
    for (auto& r : prev_records) {
        const auto& subject = r.fields.at("sseqid");
        if (deleted.count(subject)) {
            ++st.dropped_deleted;
            continue;
        }
        if (replaced.count(subject)) {
            ++st.dropped_replaced;
            continue;
        }
        if (correct && plan.correction->previous_db_letters) {
            auto& ev = r.fields.at("evalue");
            ev = format_evalue(rescale_previous_evalue(parse_evalue(ev), *plan.correction));
        }
        merged.insert_or_assign(r.id.key, std::move(r.fields));
    }
    for (auto& r : part_records) {
        if (deleted.count(r.fields.at("sseqid"))) {
            ++st.dropped_deleted;
            continue;
        }
        if (correct) {
            auto& ev = r.fields.at("evalue");
            ev = format_evalue(correct_evalue(parse_evalue(ev), *plan.correction));
        }
        auto [it, inserted] = merged.insert_or_assign(r.id.key, std::move(r.fields));
        if (!inserted) ++st.superseded;
    }

    std::string out;
    for (const auto& [key, fields] : merged) out += plugin->export_entry(EntryId{key}, fields, plan.format);
    st.output_records = merged.size();
    return out;
}

MergeStats merge_files(const fs::path& previous, const fs::path& partial, const MergePlan& plan,
                       const fs::path& out) {
    auto a = read_file(previous);
    auto b = read_file(partial);
    MergeStats stats;
    auto merged = merge_outputs(a, b, plan, &stats, previous.string(), partial.string());
    write_file_atomic(out, merged);
    return stats;
}

MergePlan build_merge_plan(Generator& generator, const GenerationSpec& increment, const std::string& format,
                           const GenerateOptions& options) {
    if (increment.kind != GenerationKind::kIncrement) {
        fail(ErrorCode::kPlan, "merge is undefined for a FULL generation");
    }
    auto art = generator.generate(increment, options);

    MergePlan plan;
    plan.format = format;
    plan.deletions = art.deletions;
    if (generator.registry().contains(increment.format)) {
        auto reader_plugin = generator.registry().get(increment.format);
        for (const auto& f : art.files) {
            auto src = open_source(f);
            auto reader = reader_plugin->entry_bounds(*src);
            EntrySlice slice;
            while (reader.next(slice)) plan.replaced.push_back(reader_plugin->split_entry(slice.bytes).id);
        }
        std::sort(plan.replaced.begin(), plan.replaced.end());
    }

    if (format == "blast-tab") {
        EValueCorrection corr;
        corr.full_db_letters = generator.measure_residues(increment.table, increment.to_seq, increment.mask);
        corr.partial_db_letters = art.residues;
        auto previous = generator.measure_residues(increment.table, increment.from_seq, increment.mask);
        if (previous > 0) corr.previous_db_letters = previous;
        if (corr.full_db_letters > 0) {
            plan.strategy = MergeStrategy::kAppendWithCorrection;
            plan.correction = corr;
        }
    }
    plan.validate();
    return plan;
}

}  // namespace vmdb
