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
#include "vmdb/encoding.h"
#include "vmdb/errors.h"
#include "vmdb/genfile.h"
#include "vmdb/ingest.h"
#include "vmdb/synthgen.h"

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

const ParserPlugin& fasta() { return *PluginRegistry::global().get("fasta"); }

std::string f0(const char* name) { return testing::slurp(testing::fixture(std::string("f0/") + name)); }

std::vector<std::string> sorted_ids(const std::vector<EntryId>& ids) {
    std::vector<std::string> out;
    for (const auto& id : ids) out.push_back(id.key);
    std::sort(out.begin(), out.end());
    return out;
}

class F0 : public ::testing::Test {
protected:
    F0() : store(dir / "store"), cache(dir / "store"), gen(store, cache) {
        Ingester ing(store);
        ing.register_table("f0", "fasta");
        ing.add_release_bytes("f0", f0("r1.fasta"), "2024_01");
        ing.add_release_bytes("f0", f0("r2.fasta"), "2024_02");
    }

    testing::TempDir dir;
    Store store;
    Cache cache;
    Generator gen;
    FieldMask all = FieldMask::make({"desc", "seq"}, {"seq"});
    FieldMask seq = FieldMask::make({"seq"}, {"seq"});
};

TEST_F(F0, FullVersionsReproduceReleases) {
    auto v1 = gen.get_version("f0", 1, all, "fasta");
    ASSERT_EQ(v1.files.size(), 1u);
    EXPECT_EQ(testing::slurp(v1.files[0]), f0("r1.fasta"));
    EXPECT_EQ(v1.entry_count, 3u);
    EXPECT_EQ(v1.residues, 12u);
    EXPECT_FALSE(v1.deletions_file);
    auto v2 = gen.get_version_labeled("f0", "2024_02", all, "fasta");
    EXPECT_EQ(testing::slurp(v2.files[0]), f0("r2.fasta"));
    EXPECT_EQ(v2.spec.to_seq, 2u);
}

TEST_F(F0, IncrementBySeqMask) {
    auto inc = gen.get_increment("f0", 1, 2, seq, "fasta");
    EXPECT_EQ(testing::slurp(inc.files[0]), ">B\nGGCC\n>D\nAAAA\n");
    EXPECT_EQ(sorted_ids(inc.deletions), std::vector<std::string>{"C"});
    ASSERT_TRUE(inc.deletions_file);
    EXPECT_EQ(testing::slurp(*inc.deletions_file), "C\n");
    EXPECT_EQ(inc.residues, 8u);
}

TEST_F(F0, IncrementByDescMask) {
    auto inc = gen.get_increment("f0", 1, 2, FieldMask::make({"desc"}), "fasta");
    EXPECT_EQ(testing::slurp(inc.files[0]), ">D desc4\n");
}

TEST_F(F0, EmptyIncrement) {
    Ingester(store).add_release_bytes("f0", f0("r2.fasta"), "");
    auto inc = gen.get_increment("f0", 2, 3, all, "fasta");
    EXPECT_EQ(testing::slurp(inc.files[0]), "");
    EXPECT_TRUE(inc.deletions.empty());
}

TEST_F(F0, CacheHitSkipsScan) {
    auto first = gen.get_version("f0", 2, all, "fasta", 2);
    EXPECT_FALSE(first.cache_hit);
    auto scans = store.scan_count();
    auto again = gen.get_version("f0", 2, all, "fasta", 2);
    EXPECT_TRUE(again.cache_hit);
    EXPECT_EQ(store.scan_count(), scans);
    ASSERT_EQ(again.files.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(testing::slurp(again.files[k]), testing::slurp(first.files[k]));
    EXPECT_EQ(again.entry_count, first.entry_count);
    EXPECT_EQ(again.key, first.key);

    auto other_mask = gen.get_version("f0", 2, seq, "fasta", 2);
    EXPECT_FALSE(other_mask.cache_hit);
    auto other_splits = gen.get_version("f0", 2, all, "fasta", 1);
    EXPECT_FALSE(other_splits.cache_hit);
    EXPECT_GT(store.scan_count(), scans);
}

TEST_F(F0, CorruptCacheEntryIsRegenerated) {
    auto first = gen.get_version("f0", 2, all, "fasta");
    testing::spit(first.files[0], ">X\nTAMPERED\n");
    auto again = gen.get_version("f0", 2, all, "fasta");
    EXPECT_FALSE(again.cache_hit);
    EXPECT_EQ(testing::slurp(again.files[0]), f0("r2.fasta"));
    EXPECT_EQ(cache.quarantined().size(), 1u);
}

TEST_F(F0, SplitsPartitionByIdHash) {
    auto whole = gen.render(GenerationSpec::full("f0", 2, all, "fasta", 1), dir / "w");
    auto split = gen.render(GenerationSpec::full("f0", 2, all, "fasta", 8), dir / "s");
    ASSERT_EQ(split.files.size(), 8u);
    std::string joined;
    for (std::uint32_t k = 0; k < 8; ++k) {
        auto text = testing::slurp(split.files[k]);
        for (const auto& id : testing::entry_ids(text, fasta())) EXPECT_EQ(stable_hash(id) % 8, k) << id;
        joined += text;
    }
    EXPECT_EQ(testing::canonical_file(joined, fasta()), testing::slurp(whole.files[0]));
}

TEST_F(F0, Errors) {
    EXPECT_EQ(code_of([&] { gen.get_version("f0", 3, all, "fasta"); }), ErrorCode::kRange);
    EXPECT_EQ(code_of([&] { gen.get_increment("f0", 2, 1, all, "fasta"); }), ErrorCode::kRange);
    EXPECT_EQ(code_of([&] { gen.get_version("f0", 1, FieldMask::make({"OS"}), "fasta"); }), ErrorCode::kMask);
    EXPECT_EQ(code_of([&] { gen.get_version("f0", 1, all, "dat"); }), ErrorCode::kFormat);
    EXPECT_EQ(code_of([&] { gen.get_version("nope", 1, all, "fasta"); }), ErrorCode::kNotFound);
    EXPECT_EQ(code_of([&] { gen.get_version_labeled("f0", "2030_01", all, "fasta"); }), ErrorCode::kNotFound);
}

TEST(Generate, IncompleteEntries) {
    testing::TempDir dir;
    Store store(dir.path());
    Cache cache(dir.path());
    Generator gen(store, cache);
    Ingester ing(store);
    ing.register_table("t", "fasta");
    ing.add_release_bytes("t", ">A x\nMK\n>B y\n>C\nW\n", "");
    auto mask = FieldMask::make({"desc", "seq"}, {"seq"});
    auto art = gen.get_version("t", 1, mask, "fasta");
    EXPECT_EQ(art.entry_count, 2u);
    EXPECT_EQ(art.excluded_incomplete, 1u);
    EXPECT_EQ(testing::slurp(art.files[0]), ">A x\nMK\n>C\nW\n");
    GenerateOptions strict;
    strict.strict = true;
    EXPECT_EQ(code_of([&] { gen.get_version("t", 1, mask, "fasta", 1, strict); }), ErrorCode::kIncomplete);
    auto lax = gen.get_version("t", 1, FieldMask::make({"desc", "seq"}), "fasta");
    EXPECT_EQ(lax.entry_count, 3u);
    EXPECT_EQ(gen.measure_residues("t", 1, mask), 3u);
}

TEST(Generate, DatExportsFasta) {
    testing::TempDir dir;
    Store store(dir.path());
    Cache cache(dir.path());
    Generator gen(store, cache);
    Ingester ing(store);
    ing.register_table("up", "dat");
    ing.add_release_file("up", testing::fixture("dat/r1.dat"), "");
    ing.add_release_file("up", testing::fixture("dat/r2.dat"), "");
    auto all = FieldMask::make({"AC", "DE", "ID", "KW", "OS", "SQ", "seq"});
    EXPECT_EQ(testing::slurp(gen.get_version("up", 1, all, "dat").files[0]),
              testing::slurp(testing::fixture("dat/r1.dat")));
    auto inc = gen.get_increment("up", 1, 2, FieldMask::make({"DE", "seq"}), "fasta");
    EXPECT_EQ(testing::entry_ids(testing::slurp(inc.files[0]), fasta()),
              (std::vector<std::string>{"ALPHA_HUMAN", "DELTA_YEAST"}));
    EXPECT_EQ(sorted_ids(inc.deletions), std::vector<std::string>{"GAMMA_MOUSE"});
}

// Increments against a direct comparison of the release files, for every
// (i, j] pair and random masks.
TEST(Generate, IncrementMatchesFileComparison) {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        ChurnProfile profile;
        profile.n_entries = 120;
        profile.seed = seed;
        auto texts = generate_release_texts(profile, 4, "fasta");
        testing::TempDir dir;
        Store store(dir.path(), StoreOptions{Codec::kDeflate, 4096, false});
        Cache cache(dir.path());
        Generator gen(store, cache);
        Ingester ing(store);
        ing.register_table("t", "fasta");
        for (const auto& t : texts) ing.add_release_bytes("t", t, "");
        const std::vector<std::set<std::string>> masks = {{"desc"}, {"seq"}, {"desc", "seq"}};
        for (Seq i = 1; i <= 4; ++i) {
            for (Seq j = i + 1; j <= 4; ++j) {
                const auto& m = masks[rng() % masks.size()];
                auto ref = testing::reference_diff(texts[i - 1], texts[j - 1], fasta(), &m);
                auto target = testing::parse_all(texts[j - 1], fasta());
                std::string expected;
                for (const auto& [id, k] : ref.classes) {
                    if (k != DiffClass::kAdded && k != DiffClass::kUpdated) continue;
                    FieldMap f;
                    for (const auto& name : m) f[name] = target.at(id).at(name);
                    expected += fasta().export_entry({id}, f, "fasta");
                }
                auto inc = gen.get_increment("t", i, j, FieldMask::make(m), "fasta", 1 + rng() % 3);
                EXPECT_EQ(testing::canonical_file(testing::concat_files(inc.files), fasta()), expected)
                    << "seed " << seed << " (" << i << "," << j << "]";
                EXPECT_EQ(sorted_ids(inc.deletions), ref.ids(DiffClass::kDeleted));
            }
        }
    }
}

TEST(Generate, ReadDeletions) {
    testing::TempDir dir;
    testing::spit(dir / "d", "B\nA\n\n");
    auto ids = read_deletions(dir / "d");
    ASSERT_EQ(ids.size(), 2u);
    EXPECT_EQ(ids[0].key, "B");
}

}  // namespace
}  // namespace vmdb
