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

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "vmdb/errors.h"
#include "vmdb/plugins.h"

namespace vmdb {

namespace {

// UniProt-style flat entries: "XX   content" lines, a sequence block of lines
// starting with five spaces, and a "//" terminator.
//
// Each two-letter code becomes a field named by the code; repeated lines of
// the same code are joined with '\n'. The sequence block becomes "seq". Codes
// outside the known subset are kept verbatim as opaque fields.
constexpr std::string_view kLeadingCodes[] = {"ID", "AC", "DE", "OS"};

std::string_view content_of(std::string_view line) {
    auto c = line.size() > 5 ? line.substr(5) : std::string_view();
    while (!c.empty() && (c.back() == ' ' || c.back() == '\r')) c.remove_suffix(1);
    return c;
}

bool is_code(std::string_view line) {
    return line.size() >= 2 && std::isupper(static_cast<unsigned char>(line[0])) &&
           std::isupper(static_cast<unsigned char>(line[1])) && (line.size() == 2 || line[2] == ' ');
}

void emit_code(std::string& out, std::string_view code, std::string_view value) {
    for (auto part : split(value, '\n')) {
        out += code;
        if (!part.empty()) {
            out += "   ";
            out += part;
        }
        out += '\n';
    }
}

std::string sequence_block(std::string_view seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); i += 60) {
        out += "    ";
        auto line = seq.substr(i, 60);
        for (std::size_t j = 0; j < line.size(); j += 10) {
            out += ' ';
            out += line.substr(j, 10);
        }
        out += '\n';
    }
    return out;
}

class DatPlugin final : public ParserPlugin {
public:
    std::string_view format_id() const override { return "dat"; }
    std::vector<std::string> default_fields() const override {
        return {"AC", "DE", "ID", "OS", "SQ", "seq"};
    }
    std::vector<std::string> required_fields() const override { return {"ID", "seq"}; }
    std::optional<std::string> sequence_field() const override { return "seq"; }
    std::vector<std::string> export_formats() const override { return {"fasta"}; }

    EntryBoundary boundary() const override {
        return EntryBoundary{EntryBoundary::Mode::kEndMarker, "//", ""};
    }

    ParsedEntry split_entry(std::string_view raw) const override {
        ParsedEntry e;
        std::string seq;
        bool in_sequence = false;
        for (auto line : split(raw, '\n')) {
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line.empty()) continue;
            if (line.substr(0, 2) == "//") break;
            if (line.substr(0, 5) == "     " || (in_sequence && line.front() == ' ')) {
                for (char c : line) {
                    if (!std::isspace(static_cast<unsigned char>(c))) {
                        seq.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
                    }
                }
                continue;
            }
            if (!is_code(line)) {
                fail(ErrorCode::kMalformedInput, "bad DAT line '" + std::string(line.substr(0, 40)) + "'");
            }
            std::string code(line.substr(0, 2));
            auto [slot, inserted] = e.fields.try_emplace(code);
            if (!inserted) slot->second += '\n';
            slot->second += content_of(line);
            in_sequence = code == "SQ";
        }
        auto id_it = e.fields.find("ID");
        if (id_it == e.fields.end()) fail(ErrorCode::kMalformedInput, "DAT entry without an ID line");
        auto id_line = trim(std::string_view(id_it->second).substr(0, id_it->second.find('\n')));
        auto id = id_line.substr(0, id_line.find_first_of(" \t"));
        if (id.empty()) fail(ErrorCode::kMalformedInput, "DAT entry with an empty ID line");
        e.id.key = std::string(id);
        if (e.fields.count("SQ") || !seq.empty()) e.fields["seq"] = std::move(seq);
        e.complete = has_required(e.fields);
        return e;
    }

    std::string export_entry(const EntryId& id, const FieldMap& fields,
                             std::string_view format) const override {
        if (format == "fasta") return export_fasta(id, fields);
        if (!supports_export(format)) {
            fail(ErrorCode::kFormat, "dat parser cannot export '" + std::string(format) + "'");
        }
        std::string out;
        auto id_it = fields.find("ID");
        emit_code(out, "ID", id_it != fields.end() ? std::string_view(id_it->second) : std::string_view(id.key));
        for (auto code : kLeadingCodes) {
            if (code == "ID") continue;
            if (auto it = fields.find(std::string(code)); it != fields.end()) emit_code(out, code, it->second);
        }
        for (const auto& [field, value] : fields) {
            if (field.size() != 2 || field == "SQ" ||
                std::find(std::begin(kLeadingCodes), std::end(kLeadingCodes), field) != std::end(kLeadingCodes)) {
                continue;
            }
            emit_code(out, field, value);
        }
        auto sq = fields.find("SQ");
        auto seq = fields.find("seq");
        if (sq != fields.end()) {
            emit_code(out, "SQ", sq->second);
        } else if (seq != fields.end()) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "SEQUENCE   %zu AA;", seq->second.size());
            emit_code(out, "SQ", buf);
        }
        if (seq != fields.end()) out += sequence_block(seq->second);
        out += "//\n";
        return out;
    }

private:
    static std::string export_fasta(const EntryId& id, const FieldMap& fields) {
        std::string out = ">" + id.key;
        if (auto de = fields.find("DE"); de != fields.end() && !de->second.empty()) {
            std::string desc = de->second;
            std::replace(desc.begin(), desc.end(), '\n', ' ');
            out += ' ';
            out += desc;
        }
        out += '\n';
        if (auto s = fields.find("seq"); s != fields.end()) out += wrap_sequence(s->second);
        return out;
    }
};

}  // namespace

std::unique_ptr<ParserPlugin> make_dat_plugin() { return std::make_unique<DatPlugin>(); }

}  // namespace vmdb
