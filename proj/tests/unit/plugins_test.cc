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

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "test_support.h"
#include "vmdb/blast_tab.h"
#include "vmdb/errors.h"
#include "vmdb/plugins.h"

namespace vmdb {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::kIo;
}

std::shared_ptr<const ParserPlugin> plugin(const char* id) { return PluginRegistry::global().get(id); }

TEST(EntryReader, FastaSkipsPreamble) {
    auto src = memory_source("junk line\n>A one\nAC\nGT\n>B\n\nGG\n");
    auto reader = plugin("fasta")->entry_bounds(*src);
    EntrySlice s;
    ASSERT_TRUE(reader.next(s));
    EXPECT_EQ(s.bytes, ">A one\nAC\nGT\n");
    EXPECT_EQ(s.offset, 10u);
    ASSERT_TRUE(reader.next(s));
    EXPECT_EQ(s.bytes, ">B\n\nGG\n");
    EXPECT_FALSE(reader.next(s));
    EXPECT_EQ(reader.skipped_bytes(), 10u);
}

TEST(EntryReader, DatNeedsTerminator) {
    auto src = memory_source("ID   X\nSQ   SEQUENCE 2 AA;\n     MK\n//\nID   Y\n");
    auto reader = plugin("dat")->entry_bounds(*src);
    EntrySlice s;
    ASSERT_TRUE(reader.next(s));
    EXPECT_EQ(plugin("dat")->split_entry(s.bytes).id.key, "X");
    EXPECT_EQ(code_of([&] { reader.next(s); }), ErrorCode::kMalformedInput);
}

TEST(EntryReader, BlastTabSkipsComments) {
    auto bytes = testing::slurp(testing::fixture("blast/hits.tab"));
    auto entries = testing::raw_entries(bytes, *plugin("blast-tab"));
    EXPECT_EQ(entries.size(), 8u);
}

TEST(Fasta, SplitEntry) {
    auto e = plugin("fasta")->split_entry(">sp|P1|X  kinase  A \r\nacg t\nGG\n");
    EXPECT_EQ(e.id.key, "sp|P1|X");
    EXPECT_EQ(e.fields.at("desc"), "kinase  A");
    EXPECT_EQ(e.fields.at("seq"), "ACGTGG");
    EXPECT_TRUE(e.complete);
    auto empty = plugin("fasta")->split_entry(">E\n");
    EXPECT_FALSE(empty.complete);
    EXPECT_EQ(code_of([] { plugin("fasta")->split_entry(">\nAC\n"); }), ErrorCode::kMalformedInput);
}

TEST(Fasta, ExportWrapsAtSixty) {
    std::string seq(130, 'M');
    auto text = plugin("fasta")->export_entry({"Q"}, {{"desc", "d"}, {"seq", seq}}, "fasta");
    EXPECT_EQ(text, ">Q d\n" + seq.substr(0, 60) + "\n" + seq.substr(60, 60) + "\n" + seq.substr(120) + "\n");
    EXPECT_EQ(code_of([] { plugin("fasta")->export_entry({"Q"}, {}, "dat"); }), ErrorCode::kFormat);
}

TEST(Fasta, FixturesAreCanonical) {
    for (auto name : {"f0/r1.fasta", "f0/r2.fasta"}) {
        auto bytes = testing::slurp(testing::fixture(name));
        EXPECT_EQ(testing::canonical_file(bytes, *plugin("fasta")), bytes) << name;
    }
}

TEST(Dat, SplitEntry) {
    auto bytes = testing::slurp(testing::fixture("dat/r1.dat"));
    auto entries = testing::raw_entries(bytes, *plugin("dat"));
    ASSERT_EQ(entries.size(), 3u);
    auto alpha = plugin("dat")->split_entry(entries[0]);
    EXPECT_EQ(alpha.id.key, "ALPHA_HUMAN");
    EXPECT_EQ(alpha.fields.at("AC"), "P10001;");
    EXPECT_EQ(alpha.fields.at("KW"), "ATP-binding; Kinase.");
    EXPECT_EQ(alpha.fields.at("seq").size(), 70u);
    EXPECT_EQ(alpha.fields.at("seq").substr(0, 10), "MKTAYIAKQR");
    auto beta = plugin("dat")->split_entry(entries[1]);
    EXPECT_EQ(beta.fields.at("DE"), "RecName: Full=Beta transporter;\nAltName: Full=B-chain;");
    EXPECT_TRUE(beta.complete);
    EXPECT_EQ(code_of([] { plugin("dat")->split_entry("AC   P1;\n//\n"); }), ErrorCode::kMalformedInput);
    EXPECT_EQ(code_of([] { plugin("dat")->split_entry("ID   X\nnot a code\n//\n"); }),
              ErrorCode::kMalformedInput);
}

TEST(Dat, FixturesAreCanonical) {
    for (auto name : {"dat/r1.dat", "dat/r2.dat"}) {
        auto bytes = testing::slurp(testing::fixture(name));
        EXPECT_EQ(testing::canonical_file(bytes, *plugin("dat")), bytes) << name;
    }
}

TEST(Dat, ExportsFasta) {
    auto bytes = testing::slurp(testing::fixture("dat/r1.dat"));
    auto beta = plugin("dat")->split_entry(testing::raw_entries(bytes, *plugin("dat"))[1]);
    EXPECT_EQ(plugin("dat")->export_entry(beta.id, beta.fields, "fasta"),
              ">BETA_HUMAN RecName: Full=Beta transporter; AltName: Full=B-chain;\n"
              "MSEQNNTEMTFQIQRIYTKDISFE\n");
}

// split(export(split(raw))) == split(raw) over random DAT entries.
TEST(Dat, ExportRoundTripProperty) {
    std::mt19937_64 rng(7);
    const std::string aa = "ACDEFGHIKLMNPQRSTVWY";
    auto dat = plugin("dat");
    for (int trial = 0; trial < 300; ++trial) {
        FieldMap f;
        f["ID"] = "E" + std::to_string(trial) + "  Reviewed;";
        int lines = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < lines; ++i) {
            if (i) f["DE"] += '\n';
            f["DE"] += "Name " + std::to_string(rng() % 1000) + ";";
        }
        if (rng() % 2) f["KW"] = "Kinase.";
        if (rng() % 2) f["OS"] = "Homo sapiens.";
        std::string seq;
        auto len = rng() % 200;
        for (std::size_t i = 0; i < len; ++i) seq += aa[rng() % aa.size()];
        if (!seq.empty()) f["seq"] = seq;
        auto text = dat->export_entry({"E" + std::to_string(trial)}, f, "dat");
        auto parsed = dat->split_entry(text);
        EXPECT_EQ(parsed.id.key, "E" + std::to_string(trial));
        auto again = dat->split_entry(dat->export_entry(parsed.id, parsed.fields, "dat"));
        EXPECT_EQ(again.fields, parsed.fields);
        for (const auto& [k, v] : f) EXPECT_EQ(parsed.fields.at(k), v) << k;
    }
}

TEST(BlastTab, IdentityAndCanonicalEvalue) {
    auto bt = plugin("blast-tab");
    auto e = bt->split_entry("q1\tA\t98.50\t120\t2\t0\t1\t120\t5\t124\t1E-50\t210\n");
    EXPECT_EQ(e.id.key, blast::identity_key("q1", "A", "1", "5"));
    EXPECT_EQ(bt->export_entry(e.id, e.fields, "blast-tab"),
              "q1\tA\t98.50\t120\t2\t0\t1\t120\t5\t124\t1e-50\t210\n");
    EXPECT_EQ(code_of([&] { bt->split_entry("q1\tA\t1\n"); }), ErrorCode::kMalformedInput);
}

TEST(Evalue, Formatting) {
    EXPECT_EQ(format_evalue(0.004), "4e-03");
    EXPECT_EQ(format_evalue(0.0), "0e+00");
    EXPECT_EQ(canonical_evalue("2.5e-08"), "2.5e-08");
    EXPECT_EQ(canonical_evalue("0.0"), "0e+00");
    EXPECT_EQ(canonical_evalue("7.5"), "7.5e+00");
    EXPECT_EQ(canonical_evalue("3E-20"), "3e-20");
    EXPECT_EQ(code_of([] { format_evalue(std::nan("")); }), ErrorCode::kValue);
}

TEST(Plugin, CompareAndComplete) {
    auto fa = plugin("fasta");
    ParsedEntry a{{"A"}, {{"desc", "x"}, {"seq", "AC"}}, true};
    ParsedEntry b{{"A"}, {{"desc", "y"}, {"seq", "AC"}}, true};
    EXPECT_EQ(fa->compare_entries(a, b, FieldMask::make({"desc", "seq"})), std::vector<std::string>{"desc"});
    EXPECT_TRUE(fa->compare_entries(a, b, FieldMask::make({"seq"})).empty());
    ParsedEntry c{{"C"}, {}, true};
    EXPECT_EQ(code_of([&] { fa->compare_entries(a, c, FieldMask::make({"seq"})); }), ErrorCode::kContract);

    ParsedEntry no_desc{{"A"}, {{"desc", ""}, {"seq", "AC"}}, true};
    EXPECT_TRUE(fa->is_complete(no_desc, FieldMask::make({"desc", "seq"}, {"seq"})));
    EXPECT_FALSE(fa->is_complete(no_desc, FieldMask::make({"desc", "seq"}, {"desc"})));

    auto batch = fa->to_store_batch(a);
    ASSERT_EQ(batch.size(), 2u);
    EXPECT_EQ(batch[0].field, "desc");
    EXPECT_EQ(batch[1].value, "AC");
}

// A minimal "key=value;key=value" line format, registered at run time.
class KvPlugin final : public ParserPlugin {
public:
    std::string_view format_id() const override { return "kv"; }
    std::vector<std::string> default_fields() const override { return {"v"}; }
    std::vector<std::string> required_fields() const override { return {"v"}; }
    EntryBoundary boundary() const override { return {EntryBoundary::Mode::kLine, "", ";"}; }
    ParsedEntry split_entry(std::string_view raw) const override {
        auto eq = raw.find('=');
        if (eq == std::string_view::npos) fail(ErrorCode::kMalformedInput, "no '='");
        ParsedEntry e;
        e.id.key = std::string(raw.substr(0, eq));
        e.fields["v"] = std::string(trim(raw.substr(eq + 1)));
        return e;
    }
    std::string export_entry(const EntryId& id, const FieldMap& f, std::string_view) const override {
        return id.key + "=" + f.at("v") + "\n";
    }
};

TEST(Registry, BuiltinsAndExtension) {
    PluginRegistry reg;
    EXPECT_EQ(code_of([&] { reg.get("kv"); }), ErrorCode::kFormat);
    reg.add("kv", [] { return std::make_unique<KvPlugin>(); });
    EXPECT_TRUE(reg.contains("kv"));
    EXPECT_EQ(reg.get("kv").get(), reg.get("kv").get());
    EXPECT_EQ(reg.get("kv")->canonical("a= 1\n"), "a=1\n");

    auto ids = PluginRegistry::global().ids();
    for (auto id : {"blast-tab", "dat", "fasta"}) {
        EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
    }
}

}  // namespace
}  // namespace vmdb
