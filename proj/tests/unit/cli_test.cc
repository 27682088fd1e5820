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

#include <regex>
#include <sstream>

#include "cli.h"
#include "test_support.h"
#include "vmdb/io.h"

namespace vmdb {
namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    Result run(std::vector<std::string> args) {
        args.insert(args.begin(), {"--root", root().string()});
        std::ostringstream out, err;
        Result r;
        r.code = cli::run(args, out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    fs::path root() const { return dir / "store"; }

    // Replaces the temp root and wall-clock times so output can be compared
    // against a golden file.
    std::string normalize(const std::string& text) const {
        std::string s = text;
        for (const auto& p : {root().string(), dir.path().string()}) {
            for (std::size_t at; (at = s.find(p)) != std::string::npos;) s.replace(at, p.size(), "<ROOT>");
        }
        const std::string fixtures = VMDB_FIXTURE_DIR;
        for (std::size_t at; (at = s.find(fixtures)) != std::string::npos;) s.replace(at, fixtures.size(), "<FIXTURES>");
        return std::regex_replace(s, std::regex(R"(time=\S+)"), "time=<T>");
    }

    void load_f0() {
        ASSERT_EQ(run({"table", "create", "f0", "--format", "fasta"}).code, 0);
        ASSERT_EQ(run({"add", "f0", testing::fixture("f0/r1.fasta").string(), "--label", "2024_01", "--run-id", "load"}).code, 0);
        ASSERT_EQ(run({"add", "f0", testing::fixture("f0/r2.fasta").string(), "--label", "2024_02", "--run-id", "load"}).code, 0);
    }

    testing::TempDir dir;
};

TEST_F(Cli, GoldenSession) {
    std::string transcript;
    auto step = [&](std::vector<std::string> args) {
        auto r = run(args);
        transcript += "$";
        for (const auto& a : args) transcript += " " + a;
        transcript += "\n" + r.out + r.err + "exit=" + std::to_string(r.code) + "\n";
    };
    step({"table", "create", "f0", "--format", "fasta"});
    step({"add", "f0", (testing::fixture("f0/r1.fasta")).string(), "--label", "2024_01", "--run-id", "r1"});
    step({"add", "f0", (testing::fixture("f0/r2.fasta")).string(), "--label", "2024_02", "--run-id", "r2"});
    step({"get", "f0", "--version", "2024_01", "--run-id", "g1"});
    step({"get", "f0", "--version", "1", "--run-id", "g2"});
    step({"increment", "f0", "--from", "1", "--to", "2", "--mask", "seq", "--run-id", "i1"});
    step({"increment", "f0", "--from", "2", "--to", "1", "--run-id", "i2"});
    step({"get", "nope", "--version", "1", "--run-id", "x"});
    step({"cache", "ls"});
    step({"log", "--run-id", "g2"});
    step({"log", "--table", "f0", "--kind", "INGEST"});
    auto text = std::regex_replace(normalize(transcript), std::regex(R"(created=\S+ last_access=\S+)"),
                                   "created=<T> last_access=<T>");
    auto golden = testing::slurp(testing::fixture("golden/cli_session.txt"));
    EXPECT_EQ(text, golden) << text;
}

TEST_F(Cli, OutputsMatchReleases) {
    load_f0();
    auto r = run({"get", "f0", "--version", "2024_02"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::smatch m;
    ASSERT_TRUE(std::regex_search(r.out, m, std::regex(R"( files=(\S+))")));
    EXPECT_EQ(testing::slurp(m[1].str()), testing::slurp(testing::fixture("f0/r2.fasta")));
    auto inc = run({"increment", "f0", "--from", "1", "--to", "2", "--mask", "seq"});
    ASSERT_TRUE(std::regex_search(inc.out, m, std::regex(R"( deleted_file=(\S+))")));
    EXPECT_EQ(testing::slurp(m[1].str()), "C\n");
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run({}).code, 3);
    auto usage = run({"get"});
    EXPECT_EQ(usage.code, 3);
    EXPECT_EQ(usage.err.rfind("error code=usage", 0), 0u) << usage.err;
    EXPECT_EQ(run({"get", "missing", "--version", "1"}).code, 2);
    load_f0();
    EXPECT_EQ(run({"get", "f0", "--version", "9"}).code, 3);
    EXPECT_EQ(run({"get", "f0", "--version", "1", "--mask", "OS"}).code, 3);
    EXPECT_EQ(run({"get", "f0", "--version", "1", "--format", "dat"}).code, 3);
    EXPECT_EQ(run({"add", "f0", (dir / "absent.fasta").string()}).code, 2);
    EXPECT_EQ(run({"table", "create", "f0", "--format", "fasta"}).code, 3);
    EXPECT_EQ(run({"log", "--since", "not-a-time"}).code, 3);
}

TEST_F(Cli, AddFailsFastWhileLocked) {
    load_f0();
    auto lock = FileLock::try_acquire(root() / "tables" / "f0" / "LOCK");
    ASSERT_TRUE(lock);
    auto r = run({"add", "f0", testing::fixture("f0/r1.fasta").string()});
    EXPECT_EQ(r.code, 5);
    EXPECT_EQ(r.err.rfind("error code=lock-held", 0), 0u) << r.err;
}

TEST_F(Cli, CorruptionExitsFour) {
    load_f0();
    auto get = run({"get", "f0", "--version", "2"});
    std::smatch m;
    ASSERT_TRUE(std::regex_search(get.out, m, std::regex(R"( files=(\S+))")));
    testing::spit(m[1].str(), "tampered");
    auto verify = run({"cache", "verify"});
    EXPECT_EQ(verify.code, 4);
    EXPECT_NE(verify.out.find("bad=1"), std::string::npos);
    testing::spit(root() / "tables" / "f0" / "MANIFEST", "garbage");
    EXPECT_EQ(run({"get", "f0", "--version", "1"}).code, 4);
}

TEST_F(Cli, RunIdTrail) {
    load_f0();
    run({"get", "f0", "--version", "1", "--run-id", "wf-42"});
    run({"get", "f0", "--version", "1", "--run-id", "wf-42"});
    auto log = run({"log", "--run-id", "wf-42"});
    EXPECT_NE(log.out.find("kind=GENERATE"), std::string::npos);
    EXPECT_NE(log.out.find("kind=CACHE_HIT"), std::string::npos);
    EXPECT_NE(log.out.find("events=4\n"), std::string::npos) << log.out;
    auto anon = run({"get", "f0", "--version", "2"});
    std::smatch m;
    ASSERT_TRUE(std::regex_search(anon.out, m, std::regex(R"( run_id=(run-[0-9a-f]{12})\n)")));
    auto trail = run({"log", "--run-id", m[1].str()});
    EXPECT_NE(trail.out.find("events=2\n"), std::string::npos) << trail.out;
}

TEST_F(Cli, MergeCommand) {
    load_f0();
    testing::spit(dir / "prev.tab", "q\tA\t90\t50\t5\t0\t1\t50\t1\t50\t1e-10\t80\n"
                                    "q\tC\t90\t50\t5\t0\t1\t50\t1\t50\t1e-10\t80\n");
    testing::spit(dir / "part.tab", "q\tD\t90\t50\t5\t0\t1\t50\t1\t50\t5e-01\t80\n");
    auto r = run({"merge", (dir / "prev.tab").string(), (dir / "part.tab").string(), "--table", "f0", "--from", "1",
                  "--to", "2", "--mask", "seq", "--out", (dir / "out.tab").string(), "--run-id", "m1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("records=2 previous=2 partial=1 dropped_deleted=1"), std::string::npos) << r.out;
    // 12 letters at release 2, 8 of them in the increment.
    EXPECT_EQ(testing::slurp(dir / "out.tab"), "q\tA\t90\t50\t5\t0\t1\t50\t1\t50\t1e-10\t80\n"
                                               "q\tD\t90\t50\t5\t0\t1\t50\t1\t50\t7.5e-01\t80\n");
    auto log = run({"log", "--run-id", "m1", "--kind", "MERGE"});
    EXPECT_NE(log.out.find("events=1\n"), std::string::npos);
}

TEST_F(Cli, Synth) {
    auto r = run({"synth", "--entries", "100", "--releases", "2", "--out", (dir / "syn").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("release=2 entries=104 added=5 updated=45 deleted=1"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir / "syn" / "r2.fasta"));
}

}  // namespace
}  // namespace vmdb
