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

#include "vmdb/synthgen.h"

#include <cmath>
#include <cstdio>

#include "vmdb/encoding.h"
#include "vmdb/errors.h"

namespace vmdb {

namespace {

constexpr std::string_view kResidues = "ACDEFGHIKLMNPQRSTVWY";
constexpr std::string_view kWords[] = {"kinase",    "transporter", "reductase", "synthase", "binding",
                                       "membrane",  "putative",    "subunit",   "domain",   "regulator",
                                       "ribosomal", "hydrolase",   "oxidase",   "factor",   "channel",
                                       "isomerase"};

std::uint64_t splitmix(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = a * 0x100000001b3ULL ^ b;
    splitmix(s);
    s ^= c * 0xc2b2ae3d27d4eb4fULL;
    return splitmix(s);
}

std::uint64_t fraction_count(double p, std::uint64_t n) {
    return static_cast<std::uint64_t>(std::floor(p * static_cast<double>(n) + 1e-9));
}

}  // namespace

void ChurnProfile::validate() const {
    for (double p : {p_new, p_update, p_delete}) {
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::kValidation, "churn fractions must lie in [0,1]");
    }
    if (p_update + p_delete > 1.0 + 1e-12) {
        fail(ErrorCode::kValidation, "update and delete fractions exceed the population");
    }
}

std::string synth_entry_id(std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "E%09llu", static_cast<unsigned long long>(index + 1));
    return buf;
}

SynthGenerator::SynthGenerator(ChurnProfile profile, std::string format)
    : profile_(profile), format_(std::move(format)), rng_(profile.seed) {
    profile_.validate();
    if (format_ != "fasta" && format_ != "dat") {
        fail(ErrorCode::kFormat, "synthetic releases are available as fasta or dat, not '" + format_ + "'");
    }
    entries_.resize(profile_.n_entries);
    alive_ = profile_.n_entries;
}

double SynthGenerator::uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::string SynthGenerator::sequence(std::uint64_t index, std::uint32_t version) const {
    std::uint64_t state = mix(profile_.seed, index, 0x5e900000ULL + version);
    std::size_t len = 200 + splitmix(state) % 200;
    std::string out;
    out.reserve(len);
    while (out.size() < len) {
        auto r = splitmix(state);
        for (int i = 0; i < 14 && out.size() < len; ++i) {
            out.push_back(kResidues[r % kResidues.size()]);
            r /= kResidues.size();
        }
    }
    return out;
}

std::string SynthGenerator::description(std::uint64_t index, std::uint32_t version) const {
    std::uint64_t state = mix(profile_.seed, index, 0xde5c0000ULL + version);
    std::string out = "synthetic";
    for (int i = 0; i < 3; ++i) {
        out += ' ';
        out += kWords[splitmix(state) % std::size(kWords)];
    }
    out += " rev" + std::to_string(version);
    return out;
}

std::string SynthGenerator::entry_text(std::uint64_t index) const {
    const auto& st = entries_.at(index);
    auto id = synth_entry_id(index);
    auto seq = sequence(index, st.seq_version);
    auto desc = description(index, st.desc_version);
    FieldMap fields;
    if (format_ == "fasta") {
        fields["desc"] = std::move(desc);
        fields["seq"] = std::move(seq);
    } else {
        char sq[64];
        std::snprintf(sq, sizeof sq, "SEQUENCE   %zu AA;", seq.size());
        fields["ID"] = id + "   Reviewed;";
        fields["AC"] = "Q" + id.substr(1) + ";";
        fields["DE"] = "RecName: Full=" + desc + ";";
        fields["OS"] = "Synthetica vulgaris.";
        fields["SQ"] = sq;
        fields["seq"] = std::move(seq);
    }
    return PluginRegistry::global().get(format_)->export_entry(EntryId{id}, fields, format_);
}

template <typename Visit>
void SynthGenerator::each_alive(Visit&& visit) const {
    for (std::uint64_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].alive) visit(i);
    }
}

void SynthGenerator::write(FileWriter& out) const {
    each_alive([&](std::uint64_t i) { out.write(entry_text(i)); });
}

void SynthGenerator::write_file(const fs::path& path) const {
    FileWriter out(path);
    write(out);
    out.close();
}

std::string SynthGenerator::render() const {
    std::string out;
    each_alive([&](std::uint64_t i) { out += entry_text(i); });
    return out;
}

void SynthGenerator::advance() {
    const std::uint64_t n = alive_;
    ChurnCounts c;
    std::uint64_t want_delete = fraction_count(profile_.p_delete, n);
    std::uint64_t want_update = fraction_count(profile_.p_update, n);
    std::uint64_t want_new = fraction_count(profile_.p_new, n);

    // Selection sampling over the alive entries picks exact counts: first
    // the deletions, then updates among the survivors.
    std::uint64_t seen = 0;
    std::uint64_t need_delete = want_delete;
    std::uint64_t need_update = want_update;
    std::vector<std::uint64_t> alive_now;
    alive_now.reserve(n);
    each_alive([&](std::uint64_t i) { alive_now.push_back(i); });
    for (auto i : alive_now) {
        std::uint64_t left = n - seen;
        ++seen;
        if (need_delete > 0 && uniform() * static_cast<double>(left) < static_cast<double>(need_delete)) {
            entries_[i].alive = false;
            --need_delete;
            ++c.deleted;
            continue;
        }
        // Among the rest, pick updates against the remaining non-deleted pool.
        std::uint64_t pool = left - need_delete;
        if (pool > 0 && need_update > 0 && uniform() * static_cast<double>(pool) < static_cast<double>(need_update)) {
            --need_update;
            ++c.updated;
            double kind = uniform();
            // Annotation edits dominate real release churn.
            if (kind < 0.7) {
                ++entries_[i].desc_version;
                ++c.desc_changes;
            } else if (kind < 0.8) {
                ++entries_[i].seq_version;
                ++c.seq_changes;
            } else {
                ++entries_[i].desc_version;
                ++entries_[i].seq_version;
                ++c.desc_changes;
                ++c.seq_changes;
            }
        }
    }
    for (std::uint64_t k = 0; k < want_new; ++k) entries_.push_back(State{});
    c.added = want_new;
    alive_ = alive_ - c.deleted + c.added;
    last_ = c;
    ++release_;
}

std::vector<fs::path> generate_releases(const ChurnProfile& profile, std::uint32_t k, const std::string& format,
                                        const fs::path& dir) {
    fs::create_directories(dir);
    SynthGenerator gen(profile, format);
    std::vector<fs::path> out;
    for (std::uint32_t r = 1; r <= k; ++r) {
        if (r > 1) gen.advance();
        out.push_back(dir / ("r" + std::to_string(r) + "." + format));
        gen.write_file(out.back());
    }
    return out;
}

std::vector<std::string> generate_release_texts(const ChurnProfile& profile, std::uint32_t k,
                                                const std::string& format) {
    SynthGenerator gen(profile, format);
    std::vector<std::string> out;
    for (std::uint32_t r = 1; r <= k; ++r) {
        if (r > 1) gen.advance();
        out.push_back(gen.render());
    }
    return out;
}

std::map<std::string, FieldMap> parse_release(std::string_view bytes, const ParserPlugin& parser) {
    std::map<std::string, FieldMap> out;
    auto src = memory_source(bytes);
    auto reader = parser.entry_bounds(*src);
    EntrySlice slice;
    while (reader.next(slice)) {
        auto e = parser.split_entry(slice.bytes);
        auto [it, inserted] = out.emplace(e.id.key, std::move(e.fields));
        if (!inserted) fail(ErrorCode::kDuplicateId, "duplicate entry id '" + it->first + "'");
    }
    return out;
}

ReleaseCounts OracleDiff::counts() const {
    ReleaseCounts c;
    for (const auto& [id, k] : classes) {
        switch (k) {
        case DiffClass::kAdded: ++c.added; break;
        case DiffClass::kUpdated: ++c.updated; break;
        case DiffClass::kUnchanged: ++c.unchanged; break;
        case DiffClass::kDeleted: ++c.deleted; break;
        }
    }
    return c;
}

std::uint64_t OracleDiff::changed_cells() const {
    std::uint64_t n = 0;
    for (const auto& [id, fields] : changed_fields) n += fields.size();
    return n;
}

std::vector<std::string> OracleDiff::ids(DiffClass c) const {
    std::vector<std::string> out;
    for (const auto& [id, k] : classes) {
        if (k == c) out.push_back(id);
    }
    return out;
}

OracleDiff oracle_diff(std::string_view a, std::string_view b, const ParserPlugin& parser,
                       const std::optional<FieldMask>& mask) {
    auto old_entries = parse_release(a, parser);
    auto new_entries = parse_release(b, parser);
    OracleDiff d;
    for (const auto& [id, fields] : old_entries) {
        if (!new_entries.count(id)) d.classes[id] = DiffClass::kDeleted;
    }
    for (const auto& [id, fields] : new_entries) {
        auto old = old_entries.find(id);
        auto& changed = d.changed_fields[id];
        if (old == old_entries.end()) {
            d.classes[id] = DiffClass::kAdded;
            for (const auto& [f, v] : fields) changed.push_back(f);
            continue;
        }
        std::set<std::string> all;
        for (const auto& [f, v] : fields) all.insert(f);
        for (const auto& [f, v] : old->second) all.insert(f);
        changed = differing_fields(old->second, fields, all);
        auto relevant = mask ? differing_fields(old->second, fields, mask->fields) : changed;
        d.classes[id] = relevant.empty() ? DiffClass::kUnchanged : DiffClass::kUpdated;
    }
    return d;
}

OracleDiff oracle_diff_files(const fs::path& a, const fs::path& b, const ParserPlugin& parser,
                             const std::optional<FieldMask>& mask) {
    auto ta = read_file(a);
    auto tb = read_file(b);
    return oracle_diff(ta, tb, parser, mask);
}

}  // namespace vmdb
