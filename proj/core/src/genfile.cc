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

#include "vmdb/genfile.h"

#include <algorithm>
#include <memory>

#include "vmdb/encoding.h"
#include "vmdb/errors.h"

namespace vmdb {

namespace {

const std::string* latest_value(const VersionedRow& row, const std::string& field, Seq at) {
    auto it = row.cells.find(field);
    if (it == row.cells.end()) return nullptr;
    const std::string* out = nullptr;
    for (const auto& c : it->second) {
        if (c.stamp > at) break;
        out = c.value ? &*c.value : nullptr;
    }
    return out;
}

std::uint64_t meta_number(const std::map<std::string, std::string>& meta, const std::string& name) {
    auto it = meta.find(name);
    return it == meta.end() ? 0 : std::stoull(it->second);
}

}  // namespace

std::vector<EntryId> read_deletions(const fs::path& path) {
    std::vector<EntryId> out;
    auto src = open_source(path);
    LineReader lines(*src);
    std::string_view line;
    while (lines.next(line)) {
        if (!line.empty()) out.push_back(EntryId{std::string(line)});
    }
    return out;
}

Generator::Generator(const Store& store, Cache& cache, ProvenanceLog* log, const PluginRegistry& registry)
    : store_(store), cache_(cache), log_(log), registry_(registry) {}

void Generator::check(const GenerationSpec& spec) const {
    spec.validate();
    auto handle = store_.table(spec.table);
    if (spec.to_seq > handle.head_seq) {
        fail(ErrorCode::kRange, "table '" + spec.table + "' has no release " + std::to_string(spec.to_seq) +
                                    " (head is " + std::to_string(handle.head_seq) + ")");
    }
    for (const auto& f : spec.mask.fields) {
        if (std::find(handle.fields.begin(), handle.fields.end(), f) == handle.fields.end()) {
            fail(ErrorCode::kMask, "table '" + spec.table + "' has no field '" + f + "'");
        }
    }
    if (handle.parser.empty()) fail(ErrorCode::kFormat, "table '" + spec.table + "' has no bound parser");
    auto plugin = registry_.get(handle.parser);
    if (!plugin->supports_export(spec.format)) {
        fail(ErrorCode::kFormat, "parser '" + handle.parser + "' cannot export '" + spec.format + "'");
    }
}

GeneratedArtifact Generator::render(const GenerationSpec& spec, const fs::path& dir, bool strict) const {
    check(spec);
    auto handle = store_.table(spec.table);
    auto plugin = registry_.get(handle.parser);
    auto seq_field = plugin->sequence_field();
    const bool incr = spec.kind == GenerationKind::kIncrement;
    const Seq to = spec.to_seq;
    const Seq from = spec.from_seq;

    GeneratedArtifact art;
    art.spec = spec;
    art.key = canonical_key(spec);
    fs::create_directories(dir);
    std::vector<std::unique_ptr<FileWriter>> outs;
    for (std::uint32_t p = 0; p < spec.splits; ++p) {
        art.files.push_back(dir / (art.key + ".p" + std::to_string(p)));
        outs.push_back(std::make_unique<FileWriter>(art.files.back()));
    }

    auto cursor = store_.cursor(spec.table, to);
    VersionedRow row;
    while (cursor.next(row)) {
        bool at_to = row.exists_at(to);
        if (incr) {
            bool at_from = row.exists_at(from);
            if (at_from && !at_to) art.deletions.push_back(row.id);
            if (!at_to) continue;
            // Survivors qualify only through a masked cell stamped in the window.
            if (at_from && !row.has_cell_in(from + 1, to, &spec.mask)) continue;
        } else if (!at_to) {
            continue;
        }
        ParsedEntry e;
        e.id = row.id;
        e.fields = row.fields_at(to, &spec.mask);
        if (!plugin->is_complete(e, spec.mask)) {
            if (strict) {
                fail(ErrorCode::kIncomplete, "entry '" + e.id.key + "' lacks a required field at release " +
                                                 std::to_string(to));
            }
            ++art.excluded_incomplete;
            continue;
        }
        if (seq_field) {
            if (const auto* s = latest_value(row, *seq_field, to)) art.residues += s->size();
        }
        auto p = static_cast<std::uint32_t>(stable_hash(e.id.key) % spec.splits);
        outs[p]->write(plugin->export_entry(e.id, e.fields, spec.format));
        ++art.entry_count;
    }
    for (auto& o : outs) {
        art.byte_size += o->size();
        o->close();
    }
    if (incr) {
        art.deletions_file = dir / (art.key + ".deleted");
        FileWriter w(*art.deletions_file);
        for (const auto& id : art.deletions) w.write(id.key + "\n");
        art.byte_size += w.size();
        w.close();
    }
    return art;
}

GeneratedArtifact Generator::generate(const GenerationSpec& spec, const GenerateOptions& options) {
    check(spec);
    auto key = canonical_key(spec);
    auto lease = cache_.acquire_lease(key);

    GeneratedArtifact art;
    if (auto hit = cache_.lookup(key)) {
        art.spec = spec;
        art.key = key;
        art.files = hit->files;
        art.deletions_file = hit->deleted;
        if (hit->deleted) art.deletions = read_deletions(*hit->deleted);
        art.byte_size = hit->byte_size;
        art.entry_count = meta_number(hit->meta, "entry_count");
        art.excluded_incomplete = meta_number(hit->meta, "excluded_incomplete");
        art.residues = meta_number(hit->meta, "residues");
        art.cache_hit = true;
        if (options.strict && art.excluded_incomplete > 0) {
            fail(ErrorCode::kIncomplete, std::to_string(art.excluded_incomplete) +
                                             " entries lack a required field in '" + key + "'");
        }
    } else {
        ScratchDir staging(cache_.staging_dir(), "gen");
        art = render(spec, staging.path(), options.strict);
        std::map<std::string, std::string> meta{
            {"table", spec.table},
            {"kind", std::string(to_string(spec.kind))},
            {"from_seq", std::to_string(spec.from_seq)},
            {"to_seq", std::to_string(spec.to_seq)},
            {"mask", spec.mask.canonical()},
            {"format", spec.format},
            {"entry_count", std::to_string(art.entry_count)},
            {"excluded_incomplete", std::to_string(art.excluded_incomplete)},
            {"residues", std::to_string(art.residues)},
            {"deletions", std::to_string(art.deletions.size())},
        };
        auto entry = cache_.insert(key, art.files, art.deletions_file, meta);
        art.files = entry.files;
        art.deletions_file = entry.deleted;
    }

    if (log_) {
        ProvenanceEvent ev;
        ev.kind = art.cache_hit ? EventKind::kCacheHit : EventKind::kGenerate;
        ev.table = spec.table;
        ev.subject = key;
        ev.run_id = options.run_id;
        ev.detail = "entries=" + std::to_string(art.entry_count) + " bytes=" + std::to_string(art.byte_size);
        log_->record(std::move(ev));
    }
    return art;
}

GeneratedArtifact Generator::get_version(const std::string& table, Seq to_seq, const FieldMask& mask,
                                         const std::string& format, std::uint32_t splits,
                                         const GenerateOptions& options) {
    return generate(GenerationSpec::full(table, to_seq, mask, format, splits), options);
}

GeneratedArtifact Generator::get_increment(const std::string& table, Seq from_seq, Seq to_seq,
                                           const FieldMask& mask, const std::string& format,
                                           std::uint32_t splits, const GenerateOptions& options) {
    return generate(GenerationSpec::increment(table, from_seq, to_seq, mask, format, splits), options);
}

GeneratedArtifact Generator::get_version_labeled(const std::string& table, const std::string& label,
                                                 const FieldMask& mask, const std::string& format,
                                                 std::uint32_t splits, const GenerateOptions& options) {
    return get_version(table, store_.resolve_version(table, label), mask, format, splits, options);
}

std::uint64_t Generator::measure_residues(const std::string& table, Seq seq, const FieldMask& mask) const {
    auto handle = store_.table(table);
    if (seq < 1 || seq > handle.head_seq) {
        fail(ErrorCode::kRange, "table '" + table + "' has no release " + std::to_string(seq));
    }
    auto plugin = registry_.get(handle.parser);
    auto seq_field = plugin->sequence_field();
    if (!seq_field) return 0;
    std::uint64_t total = 0;
    auto cursor = store_.cursor(table, seq);
    VersionedRow row;
    while (cursor.next(row)) {
        if (!row.exists_at(seq)) continue;
        ParsedEntry e;
        e.id = row.id;
        e.fields = row.fields_at(seq, &mask);
        if (!plugin->is_complete(e, mask)) continue;
        if (const auto* s = latest_value(row, *seq_field, seq)) total += s->size();
    }
    return total;
}

}  // namespace vmdb
