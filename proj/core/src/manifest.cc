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

#include "vmdb/manifest.h"

#include <charconv>

#include "vmdb/encoding.h"
#include "vmdb/errors.h"

namespace vmdb {

namespace {

std::uint64_t to_u64(std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        fail(ErrorCode::kCorruption, "bad number '" + std::string(s) + "' in manifest");
    }
    return v;
}

std::uint32_t from_hex32(std::string_view s) {
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc() || p != s.data() + s.size()) fail(ErrorCode::kCorruption, "bad hex in manifest");
    return v;
}

}  // namespace

std::string TableManifest::serialize() const {
    std::string out;
    auto line = [&out](std::initializer_list<std::string> cols) {
        bool first = true;
        for (const auto& c : cols) {
            if (!first) out += '\t';
            out += c;
            first = false;
        }
        out += '\n';
    };
    std::string field_list;
    for (const auto& f : fields) {
        if (!field_list.empty()) field_list += ',';
        field_list += f;
    }
    line({"vmdb-manifest", std::to_string(kFormatVersion)});
    line({"table", name});
    line({"note", escape_field(schema_note)});
    line({"parser", parser});
    line({"fields", escape_field(field_list)});
    line({"codec", std::string(codec_name(codec))});
    line({"rows", std::to_string(row_count)});
    for (const auto& r : releases) {
        const auto& s = r.segment;
        line({"release", std::to_string(r.seq), escape_field(r.label), r.wall_time, s.file,
              hex32(s.index_crc), std::to_string(s.raw_bytes), std::to_string(s.file_bytes),
              std::to_string(s.rows), std::to_string(s.field_cells), std::to_string(s.exists_marks),
              to_hex(s.min_key), to_hex(s.max_key), std::to_string(r.counts.added),
              std::to_string(r.counts.updated), std::to_string(r.counts.unchanged),
              std::to_string(r.counts.deleted)});
    }
    out += "checksum\t" + hex32(crc32(out)) + "\n";
    return out;
}

TableManifest TableManifest::parse(std::string_view text) {
    auto tail = text.rfind("checksum\t");
    if (tail == std::string_view::npos) fail(ErrorCode::kCorruption, "manifest has no checksum");
    auto body = text.substr(0, tail);
    auto sum = trim(text.substr(tail + 9));
    if (from_hex32(sum) != crc32(body)) fail(ErrorCode::kCorruption, "manifest checksum mismatch");

    TableManifest m;
    bool header = false;
    for (auto raw : split(body, '\n')) {
        if (raw.empty()) continue;
        auto cols = split(raw, '\t');
        auto tag = cols[0];
        auto need = [&](std::size_t n) {
            if (cols.size() != n) fail(ErrorCode::kCorruption, "malformed manifest line '" + std::string(tag) + "'");
        };
        if (tag == "vmdb-manifest") {
            need(2);
            if (to_u64(cols[1]) != static_cast<std::uint64_t>(kFormatVersion)) {
                fail(ErrorCode::kCorruption, "unsupported manifest version");
            }
            header = true;
        } else if (tag == "table") {
            need(2);
            m.name = std::string(cols[1]);
        } else if (tag == "note") {
            need(2);
            m.schema_note = unescape_field(cols[1]);
        } else if (tag == "parser") {
            need(2);
            m.parser = std::string(cols[1]);
        } else if (tag == "fields") {
            need(2);
            auto list = unescape_field(cols[1]);
            m.fields.clear();
            if (!list.empty()) {
                for (auto f : split(list, ',')) m.fields.emplace_back(f);
            }
        } else if (tag == "codec") {
            need(2);
            auto c = codec_from_name(cols[1]);
            if (!c) fail(ErrorCode::kCorruption, "unknown codec in manifest");
            m.codec = *c;
        } else if (tag == "rows") {
            need(2);
            m.row_count = to_u64(cols[1]);
        } else if (tag == "release") {
            need(17);
            ReleaseRecord r;
            r.seq = static_cast<Seq>(to_u64(cols[1]));
            r.label = unescape_field(cols[2]);
            r.wall_time = std::string(cols[3]);
            r.segment.file = std::string(cols[4]);
            r.segment.index_crc = from_hex32(cols[5]);
            r.segment.raw_bytes = to_u64(cols[6]);
            r.segment.file_bytes = to_u64(cols[7]);
            r.segment.rows = to_u64(cols[8]);
            r.segment.field_cells = to_u64(cols[9]);
            r.segment.exists_marks = to_u64(cols[10]);
            r.segment.min_key = from_hex(cols[11]);
            r.segment.max_key = from_hex(cols[12]);
            r.counts.added = to_u64(cols[13]);
            r.counts.updated = to_u64(cols[14]);
            r.counts.unchanged = to_u64(cols[15]);
            r.counts.deleted = to_u64(cols[16]);
            if (r.seq != m.releases.size() + 1) fail(ErrorCode::kCorruption, "manifest release seqs are not dense");
            m.releases.push_back(std::move(r));
        } else {
            fail(ErrorCode::kCorruption, "unknown manifest tag '" + std::string(tag) + "'");
        }
    }
    if (!header) fail(ErrorCode::kCorruption, "manifest header missing");
    return m;
}

}  // namespace vmdb
