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

#include "vmdb/plugins.h"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

#include "vmdb/errors.h"

namespace vmdb {

EntryReader::EntryReader(ByteSource& src, EntryBoundary boundary)
    : lines_(src), boundary_(std::move(boundary)) {}

void EntryReader::skip(std::string_view line) {
    skipped_bytes_ += line.size() + (lines_.terminated() ? 1 : 0);
    ++skipped_lines_;
}

namespace {

bool blank(std::string_view line) { return trim(line).empty(); }

bool starts_with(std::string_view s, std::string_view prefix) {
    return !prefix.empty() && s.substr(0, prefix.size()) == prefix;
}

std::string_view rstrip_cr(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    return s;
}

}  // namespace

bool EntryReader::next(EntrySlice& slice) {
    std::string_view line;
    switch (boundary_.mode) {
    case EntryBoundary::Mode::kLine:
        while (lines_.next(line)) {
            if (blank(line) || starts_with(line, boundary_.comment_prefix)) {
                skip(line);
                continue;
            }
            slice.offset = lines_.line_offset();
            slice.bytes.assign(line);
            slice.bytes.push_back('\n');
            return true;
        }
        return false;

    case EntryBoundary::Mode::kStartMarker:
        if (!has_pending_) {
            while (lines_.next(line)) {
                if (starts_with(line, boundary_.marker)) {
                    pending_.assign(line);
                    pending_offset_ = lines_.line_offset();
                    has_pending_ = true;
                    break;
                }
                skip(line);
            }
            if (!has_pending_) return false;
        }
        slice.offset = pending_offset_;
        slice.bytes = std::move(pending_);
        slice.bytes.push_back('\n');
        has_pending_ = false;
        while (lines_.next(line)) {
            if (starts_with(line, boundary_.marker)) {
                pending_.assign(line);
                pending_offset_ = lines_.line_offset();
                has_pending_ = true;
                break;
            }
            slice.bytes.append(line);
            slice.bytes.push_back('\n');
        }
        return true;

    case EntryBoundary::Mode::kEndMarker: {
        bool open = false;
        while (lines_.next(line)) {
            if (!open) {
                if (blank(line) || starts_with(line, boundary_.comment_prefix)) {
                    skip(line);
                    continue;
                }
                open = true;
                slice.offset = lines_.line_offset();
                slice.bytes.clear();
            }
            slice.bytes.append(line);
            slice.bytes.push_back('\n');
            if (rstrip_cr(line) == boundary_.marker) return true;
        }
        if (open) {
            fail(ErrorCode::kMalformedInput,
                 "unterminated entry starting at byte offset " + std::to_string(slice.offset));
        }
        return false;
    }
    }
    return false;
}

std::vector<std::string> ParserPlugin::compare_entries(const ParsedEntry& a, const ParsedEntry& b,
                                                       const FieldMask& mask) const {
    if (a.id != b.id) {
        fail(ErrorCode::kContract, "compare_entries on different ids '" + a.id.key + "' and '" + b.id.key + "'");
    }
    return differing_fields(a.fields, b.fields, mask.fields);
}

bool ParserPlugin::is_complete(const ParsedEntry& e, const FieldMask& mask) const {
    return std::all_of(mask.required.begin(), mask.required.end(), [&](const std::string& f) {
        auto it = e.fields.find(f);
        return it != e.fields.end() && !it->second.empty();
    });
}

std::vector<CellWrite> ParserPlugin::to_store_batch(const ParsedEntry& e) const {
    std::vector<CellWrite> out;
    out.reserve(e.fields.size());
    for (const auto& [field, value] : e.fields) out.push_back(CellWrite{e.id, field, value});
    return out;
}

bool ParserPlugin::supports_export(std::string_view format) const {
    if (format == format_id() || format == "native") return true;
    auto extra = export_formats();
    return std::find(extra.begin(), extra.end(), format) != extra.end();
}

std::string ParserPlugin::canonical(std::string_view raw) const {
    auto e = split_entry(raw);
    return export_entry(e.id, e.fields, format_id());
}

bool ParserPlugin::has_required(const FieldMap& fields) const {
    for (const auto& f : required_fields()) {
        auto it = fields.find(f);
        if (it == fields.end() || it->second.empty()) return false;
    }
    return true;
}

PluginRegistry& PluginRegistry::global() {
    static PluginRegistry* registry = [] {
        auto* r = new PluginRegistry();
        r->add("fasta", make_fasta_plugin);
        r->add("dat", make_dat_plugin);
        r->add("blast-tab", make_blast_tab_plugin);
        return r;
    }();
    return *registry;
}

void PluginRegistry::add(const std::string& id, Factory factory) {
    if (!valid_format_id(id)) fail(ErrorCode::kValidation, "invalid plugin id '" + id + "'");
    std::lock_guard g(mu_);
    factories_[id] = std::move(factory);
    instances_.erase(id);
}

std::shared_ptr<const ParserPlugin> PluginRegistry::get(std::string_view id) const {
    std::lock_guard g(mu_);
    if (auto it = instances_.find(id); it != instances_.end()) return it->second;
    auto f = factories_.find(id);
    if (f == factories_.end()) fail(ErrorCode::kFormat, "unknown parser '" + std::string(id) + "'");
    std::shared_ptr<const ParserPlugin> p = f->second();
    instances_.emplace(std::string(id), p);
    return p;
}

bool PluginRegistry::contains(std::string_view id) const {
    std::lock_guard g(mu_);
    return factories_.find(id) != factories_.end();
}

std::vector<std::string> PluginRegistry::ids() const {
    std::lock_guard g(mu_);
    std::vector<std::string> out;
    for (const auto& [id, f] : factories_) out.push_back(id);
    return out;
}

std::string format_evalue(double value) {
    if (!std::isfinite(value)) fail(ErrorCode::kValue, "non-finite e-value");
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
    if (ec != std::errc()) fail(ErrorCode::kValue, "cannot render e-value");
    return std::string(buf, p);
}

namespace {

bool is_lower_scientific(std::string_view s) {
    // d[.d+]e[+-]d+
    std::size_t i = 0;
    auto digit = [&](std::size_t k) { return k < s.size() && s[k] >= '0' && s[k] <= '9'; };
    if (!digit(i)) return false;
    ++i;
    if (i < s.size() && s[i] == '.') {
        ++i;
        if (!digit(i)) return false;
        while (digit(i)) ++i;
    }
    if (i >= s.size() || s[i] != 'e') return false;
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    if (!digit(i)) return false;
    while (digit(i)) ++i;
    return i == s.size();
}

}  // namespace

std::string canonical_evalue(std::string_view text) {
    std::string lower(trim(text));
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (is_lower_scientific(lower)) return lower;
    double v = 0;
    auto [p, ec] = std::from_chars(lower.data(), lower.data() + lower.size(), v);
    if (ec != std::errc() || p != lower.data() + lower.size() || !std::isfinite(v)) return lower;
    return format_evalue(v);
}

std::string wrap_sequence(std::string_view seq, std::size_t width) {
    std::string out;
    out.reserve(seq.size() + seq.size() / width + 1);
    for (std::size_t i = 0; i < seq.size(); i += width) {
        out.append(seq.substr(i, width));
        out.push_back('\n');
    }
    return out;
}

}  // namespace vmdb
