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

#include "vmdb/vstore.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <mutex>
#include <set>
#include <unordered_map>

#include "vmdb/encoding.h"
#include "vmdb/errors.h"
#include "vmdb/failpoint.h"

namespace vmdb {

namespace failpoint {

namespace {
std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}
std::unordered_map<std::string, std::function<void()>>& registry() {
    static std::unordered_map<std::string, std::function<void()>> r;
    return r;
}
}  // namespace

void arm(std::string_view name, std::function<void()> action) {
    std::lock_guard g(registry_mutex());
    registry()[std::string(name)] = std::move(action);
}

void disarm(std::string_view name) {
    std::lock_guard g(registry_mutex());
    registry().erase(std::string(name));
}

void hit(std::string_view name) {
    if (const char* env = std::getenv("VMDB_FAILPOINT"); env && name == env) std::_Exit(77);
    std::function<void()> action;
    {
        std::lock_guard g(registry_mutex());
        auto it = registry().find(std::string(name));
        if (it == registry().end()) return;
        action = it->second;
    }
    action();
}

}  // namespace failpoint

namespace {

constexpr std::string_view kManifestName = "MANIFEST";
constexpr std::string_view kLockName = "LOCK";
constexpr std::string_view kBlobMagic = "VMDBBLB1";

std::string segment_name(Seq seq) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "seg-%06u.dat", seq);
    return buf;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool valid_blob_name(std::string_view name) {
    if (name.empty() || name.size() > 128 || name.front() == '.') return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '-' || c == '.';
    });
}

TableHandle to_handle(const TableManifest& m) {
    return TableHandle{m.name, m.schema_note, m.head_seq(), m.row_count, m.parser, m.fields};
}

}  // namespace

bool VersionedRow::exists_at(Seq seq) const {
    return std::binary_search(exists_stamps.begin(), exists_stamps.end(), seq);
}

FieldMap VersionedRow::fields_at(Seq at, const FieldMask* mask) const {
    FieldMap out;
    for (const auto& [field, history] : cells) {
        if (mask && !mask->contains(field)) continue;
        const Cell* latest = nullptr;
        for (const auto& c : history) {
            if (c.stamp > at) break;
            latest = &c;
        }
        if (latest && latest->value) out.emplace(field, *latest->value);
    }
    return out;
}

bool VersionedRow::has_cell_in(Seq from, Seq to, const FieldMask* mask) const {
    for (const auto& [field, history] : cells) {
        if (mask && !mask->contains(field)) continue;
        for (const auto& c : history) {
            if (c.stamp >= from && c.stamp <= to) return true;
        }
    }
    return false;
}

RowCursor::RowCursor(std::vector<Source> sources, std::optional<KeyRange> range)
    : sources_(std::move(sources)), range_(std::move(range)) {
    for (auto& s : sources_) {
        if (range_) s.it.seek(range_->begin);
        s.valid = s.it.next(s.head);
    }
}

bool RowCursor::next(VersionedRow& row) {
    const std::string* min_key = nullptr;
    for (const auto& s : sources_) {
        if (s.valid && (!min_key || s.head.key < *min_key)) min_key = &s.head.key;
    }
    if (!min_key) return false;
    if (range_ && !range_->end.empty() && *min_key >= range_->end) return false;

    row = VersionedRow{};
    row.id.key = *min_key;
    // Sources are ordered by seq, so per-field histories come out ascending.
    for (auto& s : sources_) {
        if (!s.valid || s.head.key != row.id.key) continue;
        if (s.head.exists) row.exists_stamps.push_back(s.seq);
        for (auto& c : s.head.cells) {
            row.cells[c.field].push_back(Cell{s.seq, std::move(c.value)});
        }
        s.valid = s.it.next(s.head);
    }
    return true;
}

ReleaseWriter::ReleaseWriter(const Store& store, std::string table, Seq seq, std::string label,
                             FileLock lock)
    : store_(&store),
      table_(std::move(table)),
      seq_(seq),
      label_(std::move(label)),
      lock_(std::move(lock)),
      segment_path_(store.table_dir(table_) / segment_name(seq)) {
    writer_ = std::make_unique<SegmentWriter>(segment_path_, store.options().codec,
                                              store.options().block_bytes);
}

ReleaseWriter::ReleaseWriter(ReleaseWriter&& o) noexcept
    : store_(o.store_),
      table_(std::move(o.table_)),
      seq_(o.seq_),
      label_(std::move(o.label_)),
      lock_(std::move(o.lock_)),
      segment_path_(std::move(o.segment_path_)),
      writer_(std::move(o.writer_)),
      fields_(std::move(o.fields_)),
      committed_(o.committed_) {
    o.committed_ = true;
}

ReleaseWriter::~ReleaseWriter() {
    if (committed_) return;
    writer_.reset();
    std::error_code ec;
    fs::remove(segment_path_, ec);
}

void ReleaseWriter::add(const RowDelta& row) {
    if (committed_) fail(ErrorCode::kContract, "release already committed");
    writer_->add(row);
    for (const auto& c : row.cells) {
        fields_.insert(c.field);
    }
}

WriteStats ReleaseWriter::commit(const ReleaseCounts& counts, std::uint64_t new_rows) {
    if (committed_) fail(ErrorCode::kContract, "release already committed");
    auto info = writer_->finish(store_->options().sync);
    writer_.reset();
    failpoint::hit(failpoint::kAfterSegment);

    ReleaseRecord record;
    record.seq = seq_;
    record.label = label_;
    record.wall_time = iso_now();
    record.segment = info;
    record.counts = counts;
    store_->commit_release(table_, record, new_rows, fields_);
    committed_ = true;
    return WriteStats{info.rows, info.field_cells, info.exists_marks, info.raw_bytes, info.file_bytes};
}

Store::Store(fs::path root, StoreOptions options) : root_(std::move(root)), options_(options) {
    std::error_code ec;
    fs::create_directories(root_ / "tables", ec);
    if (ec) fail(ErrorCode::kIo, "cannot create store root '" + root_.string() + "': " + ec.message());
}

TableHandle Store::create_table(const std::string& name, const std::string& schema_note,
                                const std::string& parser, const std::vector<std::string>& fields) {
    if (!valid_table_name(name)) fail(ErrorCode::kValidation, "invalid table name '" + name + "'");
    auto dir = table_dir(name);
    std::error_code ec;
    fs::create_directories(dir.parent_path(), ec);
    // mkdir is the atomic claim on the name.
    if (!fs::create_directory(dir, ec)) {
        if (fs::exists(dir / kManifestName)) fail(ErrorCode::kAlreadyExists, "table '" + name + "' already exists");
        if (ec) fail(ErrorCode::kIo, "cannot create table directory: " + ec.message());
    }
    TableManifest m;
    m.name = name;
    m.schema_note = schema_note;
    m.parser = parser;
    m.fields = fields;
    m.codec = options_.codec;
    write_file_atomic(dir / kManifestName, m.serialize());
    return to_handle(m);
}

TableManifest Store::manifest(const std::string& name) const {
    if (!valid_table_name(name)) fail(ErrorCode::kNotFound, "no table '" + name + "'");
    auto path = table_dir(name) / kManifestName;
    if (!fs::exists(path)) fail(ErrorCode::kNotFound, "no table '" + name + "'");
    return TableManifest::parse(read_file(path));
}

TableHandle Store::table(const std::string& name) const { return to_handle(manifest(name)); }

bool Store::has_table(const std::string& name) const {
    return valid_table_name(name) && fs::exists(table_dir(name) / kManifestName);
}

std::vector<std::string> Store::tables() const {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(root_ / "tables")) {
        if (e.is_directory() && fs::exists(e.path() / kManifestName)) out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Seq Store::resolve_version(const std::string& table, std::string_view label_or_seq) const {
    auto m = manifest(table);
    for (const auto& r : m.releases) {
        if (r.label == label_or_seq) return r.seq;
    }
    if (all_digits(label_or_seq)) {
        Seq seq = 0;
        auto [p, ec] = std::from_chars(label_or_seq.data(), label_or_seq.data() + label_or_seq.size(), seq);
        if (ec == std::errc() && seq >= 1 && seq <= m.head_seq()) return seq;
        fail(ErrorCode::kRange, "table '" + table + "' has no release " + std::string(label_or_seq));
    }
    fail(ErrorCode::kNotFound, "table '" + table + "' has no release labelled '" + std::string(label_or_seq) + "'");
}

ReleaseWriter Store::begin_release(const std::string& table, Seq seq, std::string label) {
    if (!valid_table_name(table) || !fs::exists(table_dir(table) / kManifestName)) {
        fail(ErrorCode::kNotFound, "no table '" + table + "'");
    }
    auto lock = FileLock::try_acquire(table_dir(table) / kLockName);
    if (!lock) fail(ErrorCode::kLockHeld, "table '" + table + "' is locked by another ingest");
    auto m = manifest(table);
    if (seq != m.head_seq() + 1) {
        fail(ErrorCode::kSequencing, "release " + std::to_string(seq) + " is out of order; table '" +
                                         table + "' expects " + std::to_string(m.head_seq() + 1));
    }
    if (label.empty()) label = std::to_string(seq);
    if (label.find_first_of("\t\n\r") != std::string::npos) {
        fail(ErrorCode::kValidation, "release label contains control characters");
    }
    if (all_digits(label) && label != std::to_string(seq)) {
        fail(ErrorCode::kValidation, "numeric label '" + label + "' would shadow a release seq");
    }
    for (const auto& r : m.releases) {
        if (r.label == label) fail(ErrorCode::kAlreadyExists, "label '" + label + "' already used by release " + std::to_string(r.seq));
    }
    return ReleaseWriter(*this, table, seq, std::move(label), std::move(*lock));
}

void Store::commit_release(const std::string& table, const ReleaseRecord& record,
                           std::uint64_t new_rows, const std::set<std::string>& fields) const {
    auto m = manifest(table);
    if (record.seq != m.head_seq() + 1) fail(ErrorCode::kSequencing, "concurrent commit detected");
    // Fields first seen in this release become new columns.
    for (const auto& f : fields) {
        if (std::find(m.fields.begin(), m.fields.end(), f) == m.fields.end()) m.fields.push_back(f);
    }
    std::sort(m.fields.begin(), m.fields.end());
    m.releases.push_back(record);
    m.row_count += new_rows;
    write_file_atomic(table_dir(table) / kManifestName, m.serialize());
}

WriteStats Store::put_cells(const std::string& table, Seq seq, std::span<const CellWrite> cells,
                            std::span<const EntryId> exists, std::string label) {
    std::map<std::string, RowDelta> rows;
    for (const auto& id : exists) {
        if (id.key.empty()) fail(ErrorCode::kValidation, "empty row key");
        auto& r = rows[id.key];
        r.key = id.key;
        r.exists = true;
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& c : cells) {
        if (c.id.key.empty()) fail(ErrorCode::kValidation, "empty row key");
        if (!seen.emplace(c.id.key, c.field).second) {
            fail(ErrorCode::kDuplicateCell, "duplicate cell (" + c.id.key + ", " + c.field + ") in batch");
        }
        auto it = rows.find(c.id.key);
        if (it == rows.end() || !it->second.exists) {
            fail(ErrorCode::kContract, "row '" + c.id.key + "' has cells but no EXISTS mark");
        }
        it->second.cells.push_back(CellValue{c.field, c.value});
    }
    auto writer = begin_release(table, seq, std::move(label));
    std::uint64_t new_rows = 0;
    for (auto& [key, row] : rows) {
        std::sort(row.cells.begin(), row.cells.end(),
                  [](const CellValue& a, const CellValue& b) { return a.field < b.field; });
        if (seq == 1 || !row_history(table, EntryId{key}, seq - 1)) ++new_rows;
        writer.add(row);
    }
    return writer.commit(ReleaseCounts{}, new_rows);
}

std::vector<std::shared_ptr<SegmentReader>> Store::open_segments(const TableManifest& m, Seq to_seq) const {
    std::vector<std::shared_ptr<SegmentReader>> out;
    for (const auto& r : m.releases) {
        if (r.seq > to_seq) break;
        auto reader = SegmentReader::open(table_dir(m.name) / r.segment.file);
        if (reader->index_crc() != r.segment.index_crc) {
            fail(ErrorCode::kCorruption, "segment '" + r.segment.file + "' does not match its manifest checksum");
        }
        out.push_back(std::move(reader));
    }
    return out;
}

void Store::check_range(const TableManifest& m, Seq from_seq, Seq to_seq) const {
    if (from_seq < 1 || from_seq > to_seq || to_seq > m.head_seq()) {
        fail(ErrorCode::kRange, "bad release window [" + std::to_string(from_seq) + ", " +
                                    std::to_string(to_seq) + "] for table '" + m.name + "' (head " +
                                    std::to_string(m.head_seq()) + ")");
    }
}

RowCursor Store::cursor(const std::string& table, Seq to_seq, std::optional<KeyRange> range) const {
    auto m = manifest(table);
    if (to_seq > m.head_seq()) {
        fail(ErrorCode::kRange, "release " + std::to_string(to_seq) + " not in table '" + table + "'");
    }
    scans_++;
    std::vector<RowCursor::Source> sources;
    Seq seq = 1;
    for (auto& reader : open_segments(m, to_seq)) {
        sources.push_back(RowCursor::Source{seq++, reader->iterate(), {}, false});
    }
    return RowCursor(std::move(sources), std::move(range));
}

void Store::scan_rows(const std::string& table, Seq from_seq, Seq to_seq, const FieldMask& mask,
                      const std::optional<KeyRange>& range,
                      const std::function<void(const VersionedRow&)>& visit) const {
    auto m = manifest(table);
    if (m.head_seq() == 0) return;
    check_range(m, from_seq, to_seq);
    mask.validate();
    auto cur = cursor(table, to_seq, range);
    VersionedRow row;
    while (cur.next(row)) {
        if (!row.has_cell_in(from_seq, to_seq, &mask)) continue;
        VersionedRow window;
        window.id = row.id;
        for (auto& [field, history] : row.cells) {
            if (!mask.contains(field)) continue;
            for (auto& c : history) {
                if (c.stamp >= from_seq && c.stamp <= to_seq) window.cells[field].push_back(std::move(c));
            }
        }
        for (auto s : row.exists_stamps) {
            if (s >= from_seq && s <= to_seq) window.exists_stamps.push_back(s);
        }
        visit(window);
    }
}

std::vector<VersionedRow> Store::scan_rows(const std::string& table, Seq from_seq, Seq to_seq,
                                           const FieldMask& mask,
                                           const std::optional<KeyRange>& range) const {
    std::vector<VersionedRow> out;
    scan_rows(table, from_seq, to_seq, mask, range, [&out](const VersionedRow& r) { out.push_back(r); });
    return out;
}

std::optional<VersionedRow> Store::row_history(const std::string& table, const EntryId& id,
                                               Seq to_seq) const {
    auto m = manifest(table);
    VersionedRow row;
    row.id = id;
    bool any = false;
    Seq seq = 1;
    for (auto& reader : open_segments(m, to_seq)) {
        if (auto delta = reader->get(id.key)) {
            any = true;
            if (delta->exists) row.exists_stamps.push_back(seq);
            for (auto& c : delta->cells) row.cells[c.field].push_back(Cell{seq, std::move(c.value)});
        }
        ++seq;
    }
    if (!any) return std::nullopt;
    return row;
}

std::optional<FieldMap> Store::materialize_row(const std::string& table, const EntryId& id,
                                               Seq at_seq, const FieldMask* mask) const {
    auto m = manifest(table);
    check_range(m, 1, at_seq);
    auto row = row_history(table, id, at_seq);
    if (!row || !row->exists_at(at_seq)) return std::nullopt;
    return row->fields_at(at_seq, mask);
}

std::uint64_t Store::table_bytes(const std::string& table) const {
    auto m = manifest(table);
    auto dir = table_dir(table);
    std::uint64_t total = fs::file_size(dir / kManifestName);
    for (const auto& r : m.releases) total += fs::file_size(dir / r.segment.file);
    return total;
}

void Store::verify_table(const std::string& table) const {
    auto m = manifest(table);
    for (auto& reader : open_segments(m, m.head_seq())) reader->verify_all();
}

std::uint32_t Store::blob_head(const std::string& name) const {
    if (!valid_blob_name(name)) fail(ErrorCode::kValidation, "invalid blob name '" + name + "'");
    auto dir = root_ / "blobs" / name;
    std::uint32_t head = 0;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
        auto fname = e.path().filename().string();
        if (fname.size() < 2 || fname[0] != 'v' || !all_digits(std::string_view(fname).substr(1))) continue;
        head = std::max<std::uint32_t>(head, static_cast<std::uint32_t>(std::stoul(fname.substr(1))));
    }
    return head;
}

std::uint32_t Store::put_blob(const std::string& name, std::string_view bytes) {
    auto dir = root_ / "blobs" / name;
    auto version = blob_head(name) + 1;
    fs::create_directories(dir);
    std::string payload(kBlobMagic);
    put_fixed32(payload, crc32(bytes));
    put_fixed64(payload, bytes.size());
    payload.append(bytes);
    auto tmp = unique_temp_name(dir / "blob");
    {
        FileWriter w(tmp);
        w.write(payload);
        if (options_.sync) w.sync();
        w.close();
    }
    // link() refuses to overwrite, so concurrent writers get distinct versions.
    while (::link(tmp.c_str(), (dir / ("v" + std::to_string(version))).c_str()) != 0) {
        if (errno != EEXIST) {
            fs::remove(tmp);
            fail(ErrorCode::kIo, "cannot publish blob '" + name + "'");
        }
        ++version;
    }
    fs::remove(tmp);
    if (options_.sync) sync_directory(dir);
    return version;
}

std::string Store::get_blob(const std::string& name, std::uint32_t version) const {
    if (!valid_blob_name(name)) fail(ErrorCode::kValidation, "invalid blob name '" + name + "'");
    auto path = root_ / "blobs" / name / ("v" + std::to_string(version));
    if (version == 0 || !fs::exists(path)) {
        fail(ErrorCode::kNotFound, "no blob '" + name + "' version " + std::to_string(version));
    }
    auto data = read_file(path);
    if (data.size() < kBlobMagic.size() + 12 || std::string_view(data).substr(0, kBlobMagic.size()) != kBlobMagic) {
        fail(ErrorCode::kCorruption, "bad blob header in '" + path.string() + "'");
    }
    Decoder in(std::string_view(data).substr(kBlobMagic.size()));
    auto crc = in.fixed32();
    auto len = in.fixed64();
    auto body = data.substr(kBlobMagic.size() + 12);
    if (body.size() != len || crc32(body) != crc) fail(ErrorCode::kCorruption, "blob checksum mismatch in '" + path.string() + "'");
    return body;
}

}  // namespace vmdb
