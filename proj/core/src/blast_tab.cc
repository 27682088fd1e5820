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

#include "vmdb/blast_tab.h"

#include "vmdb/errors.h"
#include "vmdb/plugins.h"

namespace vmdb {

namespace blast {

std::string identity_key(std::string_view qseqid, std::string_view sseqid, std::string_view qstart,
                         std::string_view sstart) {
    std::string key;
    key.reserve(qseqid.size() + sseqid.size() + qstart.size() + sstart.size() + 3);
    key.append(qseqid).append("\t").append(sseqid).append("\t").append(qstart).append("\t").append(sstart);
    return key;
}

}  // namespace blast

namespace {

class BlastTabPlugin final : public ParserPlugin {
public:
    std::string_view format_id() const override { return "blast-tab"; }
    std::vector<std::string> default_fields() const override {
        return {blast::kColumns.begin(), blast::kColumns.end()};
    }
    std::vector<std::string> required_fields() const override { return default_fields(); }

    EntryBoundary boundary() const override {
        return EntryBoundary{EntryBoundary::Mode::kLine, "", "#"};
    }

    ParsedEntry split_entry(std::string_view raw) const override {
        while (!raw.empty() && (raw.back() == '\n' || raw.back() == '\r')) raw.remove_suffix(1);
        auto cols = split(raw, '\t');
        if (cols.size() != blast::kColumns.size()) {
            fail(ErrorCode::kMalformedInput, "BLAST tabular line has " + std::to_string(cols.size()) +
                                                 " columns, expected 12");
        }
        ParsedEntry e;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            e.fields.emplace(std::string(blast::kColumns[i]), std::string(trim(cols[i])));
        }
        const auto& f = e.fields;
        if (f.at("qseqid").empty() || f.at("sseqid").empty()) {
            fail(ErrorCode::kMalformedInput, "BLAST tabular line without query or subject id");
        }
        e.id.key = blast::identity_key(f.at("qseqid"), f.at("sseqid"), f.at("qstart"), f.at("sstart"));
        e.complete = has_required(e.fields);
        return e;
    }

    std::string export_entry(const EntryId&, const FieldMap& fields,
                             std::string_view format) const override {
        if (!supports_export(format)) {
            fail(ErrorCode::kFormat, "blast-tab parser cannot export '" + std::string(format) + "'");
        }
        std::string out;
        for (std::size_t i = 0; i < blast::kColumns.size(); ++i) {
            if (i) out += '\t';
            auto it = fields.find(std::string(blast::kColumns[i]));
            if (it == fields.end()) continue;
            out += blast::kColumns[i] == "evalue" ? canonical_evalue(it->second) : it->second;
        }
        out += '\n';
        return out;
    }
};

}  // namespace

std::unique_ptr<ParserPlugin> make_blast_tab_plugin() { return std::make_unique<BlastTabPlugin>(); }

}  // namespace vmdb
