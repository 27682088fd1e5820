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

#include <cctype>

#include "vmdb/errors.h"
#include "vmdb/plugins.h"

namespace vmdb {

namespace {

// Fields: "desc" (header text after the id, may be empty) and "seq" (line
// folds and whitespace removed, uppercased).
class FastaPlugin final : public ParserPlugin {
public:
    std::string_view format_id() const override { return "fasta"; }
    std::vector<std::string> default_fields() const override { return {"desc", "seq"}; }
    std::vector<std::string> required_fields() const override { return {"seq"}; }
    std::optional<std::string> sequence_field() const override { return "seq"; }

    EntryBoundary boundary() const override {
        return EntryBoundary{EntryBoundary::Mode::kStartMarker, ">", ""};
    }

    ParsedEntry split_entry(std::string_view raw) const override {
        auto nl = raw.find('\n');
        auto header = raw.substr(0, nl);
        if (header.empty() || header.front() != '>') {
            fail(ErrorCode::kMalformedInput, "FASTA entry does not start with '>'");
        }
        header = trim(header.substr(1));
        auto ws = header.find_first_of(" \t");
        auto id = header.substr(0, ws);
        if (id.empty()) fail(ErrorCode::kMalformedInput, "FASTA entry without an id");

        ParsedEntry e;
        e.id.key = std::string(id);
        e.fields["desc"] = ws == std::string_view::npos ? std::string() : std::string(trim(header.substr(ws)));
        std::string seq;
        if (nl != std::string_view::npos) {
            auto body = raw.substr(nl + 1);
            seq.reserve(body.size());
            for (char c : body) {
                if (!std::isspace(static_cast<unsigned char>(c))) {
                    seq.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
                }
            }
        }
        e.fields["seq"] = std::move(seq);
        e.complete = has_required(e.fields);
        return e;
    }

    std::string export_entry(const EntryId& id, const FieldMap& fields,
                             std::string_view format) const override {
        if (!supports_export(format)) {
            fail(ErrorCode::kFormat, "fasta parser cannot export '" + std::string(format) + "'");
        }
        std::string out = ">" + id.key;
        if (auto d = fields.find("desc"); d != fields.end() && !d->second.empty()) {
            out += ' ';
            out += d->second;
        }
        out += '\n';
        if (auto s = fields.find("seq"); s != fields.end()) out += wrap_sequence(s->second);
        return out;
    }
};

}  // namespace

std::unique_ptr<ParserPlugin> make_fasta_plugin() { return std::make_unique<FastaPlugin>(); }

}  // namespace vmdb
