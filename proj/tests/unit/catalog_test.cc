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
#include <sys/wait.h>
#include <unistd.h>

#include <functional>
#include <set>

#include "test_support.h"
#include "vmdb/catalog.h"
#include "vmdb/errors.h"

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

ProvenanceEvent event(EventKind k, std::string table, std::string run, std::string detail = "") {
    ProvenanceEvent e;
    e.kind = k;
    e.table = std::move(table);
    e.subject = "s";
    e.run_id = std::move(run);
    e.detail = std::move(detail);
    return e;
}

TEST(Provenance, RecordAndQuery) {
    testing::TempDir dir;
    ProvenanceLog log(dir / "provenance.log");
    EXPECT_TRUE(log.query().empty());
    auto a = log.record(event(EventKind::kIngest, "t1", "r1", "tab\there\nnewline"));
    auto b = log.record(event(EventKind::kGenerate, "t1", "r2"));
    auto c = log.record(event(EventKind::kAccess, "t2", "r1"));
    EXPECT_LT(a.timestamp, b.timestamp);
    EXPECT_LT(b.timestamp, c.timestamp);

    auto all = log.query();
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0], a);
    EXPECT_EQ(all[0].detail, "tab\there\nnewline");

    ProvenanceFilter by_run;
    by_run.run_id = "r1";
    EXPECT_EQ(log.query(by_run), (std::vector<ProvenanceEvent>{a, c}));
    ProvenanceFilter by_table;
    by_table.table = "t1";
    by_table.kind = EventKind::kGenerate;
    EXPECT_EQ(log.query(by_table), std::vector<ProvenanceEvent>{b});
    ProvenanceFilter window;
    window.since = b.timestamp;
    window.until = c.timestamp;
    EXPECT_EQ(log.query(window), (std::vector<ProvenanceEvent>{b, c}));
}

TEST(Provenance, FilterValidation) {
    testing::TempDir dir;
    ProvenanceLog log(dir / "p.log");
    ProvenanceFilter f;
    f.since = "yesterday";
    EXPECT_EQ(code_of([&] { log.query(f); }), ErrorCode::kValidation);
    f.since = "2026-02-01T00:00:00Z";
    f.until = "2026-01-01T00:00:00Z";
    EXPECT_EQ(code_of([&] { log.query(f); }), ErrorCode::kValidation);
    ProvenanceFilter empty_run;
    empty_run.run_id = "";
    EXPECT_EQ(code_of([&] { log.query(empty_run); }), ErrorCode::kValidation);
}

TEST(Provenance, KindNames) {
    for (auto k : {EventKind::kIngest, EventKind::kGenerate, EventKind::kCacheHit, EventKind::kMerge,
                   EventKind::kAccess}) {
        EXPECT_EQ(event_kind_from_string(to_string(k)), k);
    }
    EXPECT_EQ(to_string(EventKind::kCacheHit), "CACHE_HIT");
    EXPECT_FALSE(event_kind_from_string("cache_hit"));
}

TEST(Provenance, ConcurrentWritersKeepLinesWhole) {
    testing::TempDir dir;
    auto path = dir / "p.log";
    constexpr int kProcs = 4, kEach = 150;
    std::vector<pid_t> kids;
    for (int p = 0; p < kProcs; ++p) {
        pid_t pid = ::fork();
        ASSERT_GE(pid, 0);
        if (pid == 0) {
            ProvenanceLog log(path);
            for (int i = 0; i < kEach; ++i) {
                log.record(event(EventKind::kAccess, "t", "run-" + std::to_string(p), std::string(200, 'x')));
            }
            ::_exit(0);
        }
        kids.push_back(pid);
    }
    for (auto pid : kids) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
    }
    ProvenanceLog log(path);
    auto all = log.query();
    EXPECT_EQ(all.size(), static_cast<std::size_t>(kProcs * kEach));
    for (int p = 0; p < kProcs; ++p) {
        ProvenanceFilter f;
        f.run_id = "run-" + std::to_string(p);
        auto mine = log.query(f);
        ASSERT_EQ(mine.size(), static_cast<std::size_t>(kEach));
        for (std::size_t i = 1; i < mine.size(); ++i) EXPECT_LT(mine[i - 1].timestamp, mine[i].timestamp);
    }
}

const std::string kKey = "t.full.1-1.2d3ee918.fasta.s2";

std::vector<fs::path> stage(const Cache& cache, const std::vector<std::string>& contents) {
    fs::create_directories(cache.staging_dir());
    std::vector<fs::path> out;
    static int n = 0;
    for (const auto& c : contents) {
        auto p = cache.staging_dir() / ("staged-" + std::to_string(n++));
        testing::spit(p, c);
        out.push_back(p);
    }
    return out;
}

TEST(Cache, InsertAndLookup) {
    testing::TempDir dir;
    Cache cache(dir.path());
    EXPECT_FALSE(cache.lookup(kKey));
    auto del = stage(cache, {"C\n"})[0];
    auto entry = cache.insert(kKey, stage(cache, {">A\nAC\n", ">B\nGG\n"}), del, {{"entry_count", "2"}, {"mask", "a=b\tc"}});
    EXPECT_EQ(entry.files, (std::vector<fs::path>{cache.file_path(kKey, 0), cache.file_path(kKey, 1)}));
    EXPECT_EQ(entry.byte_size, 14u);
    auto hit = cache.lookup(kKey);
    ASSERT_TRUE(hit);
    EXPECT_EQ(testing::slurp(hit->files[1]), ">B\nGG\n");
    EXPECT_EQ(testing::slurp(*hit->deleted), "C\n");
    EXPECT_EQ(hit->meta.at("entry_count"), "2");
    EXPECT_EQ(hit->meta.at("mask"), "a=b\tc");
    EXPECT_EQ(hit->checksums[0], file_crc32(hit->files[0]));
    EXPECT_EQ(cache.total_bytes(), 14u);
    EXPECT_EQ(cache.list().size(), 1u);
    EXPECT_EQ(code_of([&] { cache.insert("not a key", stage(cache, {"x"}), std::nullopt, {}); }),
              ErrorCode::kValidation);
}

TEST(Cache, TamperedEntryIsQuarantined) {
    testing::TempDir dir;
    Cache cache(dir.path());
    cache.insert(kKey, stage(cache, {">A\nAC\n", ">B\nGG\n"}), std::nullopt, {});
    testing::spit(cache.file_path(kKey, 1), ">B\nGT\n");
    EXPECT_FALSE(cache.lookup(kKey));
    auto q = cache.quarantined();
    ASSERT_EQ(q.size(), 1u);
    EXPECT_FALSE(fs::exists(cache.file_path(kKey, 0)));
    EXPECT_TRUE(cache.list().empty());
    bool has_reason = false;
    for (const auto& d : fs::directory_iterator(cache.dir() / "quarantine")) has_reason |= fs::exists(d.path() / "REASON");
    EXPECT_TRUE(has_reason);
}

TEST(Cache, VerifyReportsBadEntries) {
    testing::TempDir dir;
    Cache cache(dir.path());
    const std::string other = "t.full.1-2.2d3ee918.fasta.s1";
    cache.insert(kKey, stage(cache, {"a", "b"}), std::nullopt, {});
    cache.insert(other, stage(cache, {"c"}), std::nullopt, {});
    EXPECT_TRUE(cache.verify().empty());
    fs::remove(cache.file_path(other, 0));
    EXPECT_EQ(cache.verify(), std::vector<std::string>{other});
    EXPECT_EQ(cache.list().size(), 1u);
}

TEST(Cache, EvictionIsOldestFirstAndRespectsLeases) {
    testing::TempDir dir;
    Cache cache(dir.path());
    std::vector<std::string> keys;
    for (int i = 1; i <= 4; ++i) {
        keys.push_back("t.full.1-" + std::to_string(i) + ".2d3ee918.fasta.s1");
        cache.insert(keys.back(), stage(cache, {std::string(100, 'x')}), std::nullopt, {});
        ::usleep(2000);
    }
    EXPECT_EQ(cache.total_bytes(), 400u);
    {
        auto lease = cache.acquire_lease(keys[0]);
        EXPECT_EQ(cache.evict_oldest(250), (std::vector<std::string>{keys[1], keys[2]}));
        EXPECT_TRUE(cache.lookup(keys[0]));
    }
    EXPECT_EQ(cache.evict_oldest(100), std::vector<std::string>{keys[0]});
    EXPECT_EQ(cache.total_bytes(), 100u);
    EXPECT_TRUE(cache.lookup(keys[3]));
    EXPECT_TRUE(cache.evict_oldest(1000).empty());
}

TEST(Cache, ReinsertReplaces) {
    testing::TempDir dir;
    Cache cache(dir.path());
    cache.insert(kKey, stage(cache, {"a", "b"}), std::nullopt, {});
    cache.insert(kKey, stage(cache, {"c", "dd"}), std::nullopt, {});
    auto hit = cache.lookup(kKey);
    ASSERT_TRUE(hit);
    EXPECT_EQ(testing::slurp(hit->files[1]), "dd");
    EXPECT_EQ(hit->byte_size, 3u);
}

}  // namespace
}  // namespace vmdb
