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

#include "vmdb/ingest.h"

#include <algorithm>
#include <chrono>
#include <future>
#include <optional>

#include "vmdb/catalog.h"
#include "vmdb/encoding.h"
#include "vmdb/errors.h"

namespace vmdb {

namespace {

RowDelta to_row(ParsedEntry&& e) {
    RowDelta r;
    r.key = std::move(e.id.key);
    r.exists = true;
    r.cells.reserve(e.fields.size());
    for (auto& [f, v] : e.fields) r.cells.push_back(CellValue{f, std::move(v)});
    return r;
}

ParsedEntry to_entry(RowDelta&& r) {
    ParsedEntry e;
    e.id.key = std::move(r.key);
    for (auto& c : r.cells) e.fields.emplace(std::move(c.field), c.value ? std::move(*c.value) : std::string());
    return e;
}

std::size_t footprint(const ParsedEntry& e) {
    std::size_t n = sizeof(RowDelta) + e.id.key.size();
    for (const auto& [f, v] : e.fields) n += sizeof(CellValue) + f.size() + v.size();
    return n;
}

std::uint32_t partition_of(std::string_view key, std::uint32_t workers) {
    return static_cast<std::uint32_t>(stable_hash(key) % workers);
}

void sort_and_check(std::vector<RowDelta>& rows) {
    std::sort(rows.begin(), rows.end(), [](const RowDelta& a, const RowDelta& b) { return a.key < b.key; });
    auto dup = std::adjacent_find(rows.begin(), rows.end(),
                                  [](const RowDelta& a, const RowDelta& b) { return a.key == b.key; });
    if (dup != rows.end()) fail(ErrorCode::kDuplicateId, "duplicate entry id '" + dup->key + "' in release file");
}

// K-way merge of sorted runs. Equal keys in two runs are duplicate ids.
class RunMerge {
public:
    void add_file(const fs::path& path) {
        auto reader = SegmentReader::open(path);
        Source s{reader->iterate(), {}, {}, 0, false};
        s.valid = s.it->next(s.head);
        sources_.push_back(std::move(s));
    }

    void add_memory(std::vector<RowDelta> rows) {
        Source s{std::nullopt, {}, std::move(rows), 0, false};
        s.valid = advance(s);
        sources_.push_back(std::move(s));
    }

    bool next(RowDelta& out) {
        Source* min = nullptr;
        for (auto& s : sources_) {
            if (!s.valid) continue;
            if (!min || s.head.key < min->head.key) {
                min = &s;
            } else if (s.head.key == min->head.key) {
                fail(ErrorCode::kDuplicateId, "duplicate entry id '" + s.head.key + "' in release file");
            }
        }
        if (!min) return false;
        out = std::move(min->head);
        min->valid = min->it ? min->it->next(min->head) : advance(*min);
        return true;
    }

private:
    struct Source {
        std::optional<SegmentReader::Iterator> it;
        RowDelta head;
        std::vector<RowDelta> memory;
        std::size_t pos;
        bool valid;
    };

    static bool advance(Source& s) {
        if (s.pos >= s.memory.size()) return false;
        s.head = std::move(s.memory[s.pos++]);
        return true;
    }

    std::vector<Source> sources_;
};

struct PartitionResult {
    ReleaseCounts counts;
    std::uint64_t new_rows = 0;
};

}  // namespace

RowDelta diff_entry(const ParsedEntry& entry, const VersionedRow* history, Seq prev_seq, DiffClass& klass) {
    RowDelta d;
    d.key = entry.id.key;
    d.exists = true;
    FieldMap old_fields;
    bool prev_exists = false;
    if (history && prev_seq >= 1) {
        old_fields = history->fields_at(prev_seq);
        prev_exists = history->exists_at(prev_seq);
    }
    // Walk both sorted maps; fields that vanished get a removal cell.
    auto it_new = entry.fields.begin();
    auto it_old = old_fields.begin();
    while (it_new != entry.fields.end() || it_old != old_fields.end()) {
        if (it_old == old_fields.end() || (it_new != entry.fields.end() && it_new->first < it_old->first)) {
            d.cells.push_back(CellValue{it_new->first, it_new->second});
            ++it_new;
        } else if (it_new == entry.fields.end() || it_old->first < it_new->first) {
            d.cells.push_back(CellValue{it_old->first, std::nullopt});
            ++it_old;
        } else {
            if (!prev_exists || it_new->second != it_old->second) {
                d.cells.push_back(CellValue{it_new->first, it_new->second});
            }
            ++it_new;
            ++it_old;
        }
    }
    if (!prev_exists) {
        klass = DiffClass::kAdded;
    } else {
        klass = d.cells.empty() ? DiffClass::kUnchanged : DiffClass::kUpdated;
    }
    return d;
}

Ingester::Ingester(Store& store, const PluginRegistry& registry, ProvenanceLog* log)
    : store_(store), registry_(registry), log_(log) {}

TableHandle Ingester::register_table(const std::string& name, const std::string& parser,
                                     std::vector<std::string> field_set, const std::string& schema_note) {
    if (!registry_.contains(parser)) fail(ErrorCode::kValidation, "unknown parser '" + parser + "'");
    if (field_set.empty()) field_set = registry_.get(parser)->default_fields();
    std::sort(field_set.begin(), field_set.end());
    field_set.erase(std::unique(field_set.begin(), field_set.end()), field_set.end());
    return store_.create_table(name, schema_note, parser, field_set);
}

IngestReport Ingester::add_release_file(const std::string& table, const fs::path& path,
                                        const std::string& label, const IngestOptions& options) {
    auto src = open_source(path);
    return add_release(table, *src, label, options);
}

IngestReport Ingester::add_release_bytes(const std::string& table, std::string_view bytes,
                                         const std::string& label, const IngestOptions& options) {
    auto src = memory_source(bytes);
    return add_release(table, *src, label, options);
}

IngestReport Ingester::ingest_partitioned(const std::string& table, ByteSource& source,
                                          const std::string& parser, const std::string& label,
                                          std::uint32_t workers) {
    IngestOptions opts;
    opts.parser = parser;
    opts.workers = workers;
    return add_release(table, source, label, opts);
}

IngestReport Ingester::add_release(const std::string& table, ByteSource& source,
                                   const std::string& label, const IngestOptions& options) {
    auto started = std::chrono::steady_clock::now();
    if (options.workers == 0) fail(ErrorCode::kValidation, "workers must be at least 1");
    const auto workers = options.workers;

    auto handle = store_.table(table);
    auto parser_id = options.parser.empty() ? handle.parser : options.parser;
    if (parser_id.empty()) fail(ErrorCode::kValidation, "table '" + table + "' has no bound parser");
    auto plugin = registry_.get(parser_id);

    const Seq seq = handle.head_seq + 1;
    auto writer = store_.begin_release(table, seq, label);
    ScratchDir scratch(store_.table_dir(table) / "tmp", "ingest");

    // Parse and partition, spilling sorted runs past the memory budget.
    std::vector<std::vector<RowDelta>> buffers(workers);
    std::vector<std::vector<fs::path>> runs(workers);
    std::size_t buffered = 0;
    std::size_t spills = 0;
    auto spill = [&] {
        std::vector<std::future<void>> jobs;
        for (std::uint32_t p = 0; p < workers; ++p) {
            if (buffers[p].empty()) continue;
            auto path = scratch.path() / ("run-" + std::to_string(p) + "-" + std::to_string(spills) + ".dat");
            runs[p].push_back(path);
            jobs.push_back(std::async(std::launch::async, [&rows = buffers[p], path] {
                sort_and_check(rows);
                SegmentWriter w(path, Codec::kNone);
                for (const auto& r : rows) w.add(r);
                w.finish(false);
                rows.clear();
                rows.shrink_to_fit();
            }));
        }
        for (auto& j : jobs) j.get();
        buffered = 0;
        ++spills;
    };

    auto reader = plugin->entry_bounds(source);
    EntrySlice slice;
    while (reader.next(slice)) {
        ParsedEntry e;
        try {
            e = plugin->split_entry(slice.bytes);
        } catch (const Error& err) {
            fail(err.code(), std::string(err.what()) + " (entry at byte offset " + std::to_string(slice.offset) + ")");
        }
        buffered += footprint(e);
        auto p = partition_of(e.id.key, workers);
        buffers[p].push_back(to_row(std::move(e)));
        if (buffered > options.memory_budget) spill();
    }

    // Diff each partition against the previous release.
    std::vector<fs::path> outputs(workers);
    std::vector<std::future<PartitionResult>> jobs;
    for (std::uint32_t p = 0; p < workers; ++p) {
        outputs[p] = scratch.path() / ("out-" + std::to_string(p) + ".dat");
        jobs.push_back(std::async(std::launch::async, [&, p] {
            RunMerge input;
            for (const auto& r : runs[p]) input.add_file(r);
            sort_and_check(buffers[p]);
            input.add_memory(std::move(buffers[p]));

            PartitionResult res;
            std::optional<RowCursor> prev;
            if (seq > 1) prev.emplace(store_.cursor(table, seq - 1));
            VersionedRow prow;
            auto next_prev = [&] {
                if (!prev) return false;
                while (prev->next(prow)) {
                    if (partition_of(prow.id.key, workers) == p) return true;
                }
                return false;
            };
            bool have_prev = next_prev();
            RowDelta nrow;
            bool have_new = input.next(nrow);

            SegmentWriter out(outputs[p], Codec::kNone);
            DiffClass klass{};
            while (have_new || have_prev) {
                if (have_prev && (!have_new || prow.id.key < nrow.key)) {
                    if (prow.exists_at(seq - 1)) res.counts.deleted++;
                    have_prev = next_prev();
                    continue;
                }
                bool matched = have_prev && prow.id.key == nrow.key;
                auto entry = to_entry(std::move(nrow));
                auto delta = diff_entry(entry, matched ? &prow : nullptr, seq - 1, klass);
                switch (klass) {
                case DiffClass::kAdded: res.counts.added++; break;
                case DiffClass::kUpdated: res.counts.updated++; break;
                default: res.counts.unchanged++; break;
                }
                if (!matched) res.new_rows++;
                out.add(delta);
                have_new = input.next(nrow);
                if (matched) have_prev = next_prev();
            }
            out.finish(false);
            return res;
        }));
    }
    ReleaseCounts counts;
    std::uint64_t new_rows = 0;
    std::optional<Error> first_error;
    for (auto& j : jobs) {
        try {
            auto r = j.get();
            counts.added += r.counts.added;
            counts.updated += r.counts.updated;
            counts.unchanged += r.counts.unchanged;
            counts.deleted += r.counts.deleted;
            new_rows += r.new_rows;
        } catch (const Error& e) {
            if (!first_error) first_error = e;
        }
    }
    if (first_error) throw *first_error;

    // Partitions are disjoint; merging them restores global key order, so the
    // segment bytes do not depend on the worker count.
    RunMerge merged;
    for (const auto& o : outputs) merged.add_file(o);
    RowDelta row;
    while (merged.next(row)) writer.add(row);
    auto stats = writer.commit(counts, new_rows);

    IngestReport report;
    report.table = table;
    report.seq = seq;
    report.label = store_.manifest(table).releases.back().label;
    report.counts = counts;
    report.cells_written = stats.field_cells;
    report.exists_marks = stats.exists_marks;
    report.bytes_written = stats.bytes_written;
    report.skipped_bytes = reader.skipped_bytes();
    report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (log_) {
        ProvenanceEvent ev;
        ev.kind = EventKind::kIngest;
        ev.table = table;
        ev.subject = std::to_string(seq);
        ev.run_id = options.run_id;
        ev.detail = "label=" + report.label + " added=" + std::to_string(counts.added) +
                    " updated=" + std::to_string(counts.updated) + " unchanged=" +
                    std::to_string(counts.unchanged) + " deleted=" + std::to_string(counts.deleted);
        log_->record(std::move(ev));
    }
    return report;
}

}  // namespace vmdb
