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

#include <zlib.h>

#include <random>

#include "test_support.h"
#include "vmdb/codec.h"
#include "vmdb/encoding.h"
#include "vmdb/errors.h"
#include "vmdb/io.h"

namespace vmdb {
namespace {

TEST(Hash, Fnv1aReferenceVectors) {
    EXPECT_EQ(stable_hash(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(stable_hash("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(stable_hash("foobar"), 0x85944171f73967e8ULL);
}

TEST(Crc, StandardCheckValue) { EXPECT_EQ(crc32("123456789"), 0xcbf43926u); }

TEST(Varint, RoundTripsRandomValues) {
    std::mt19937_64 rng(3);
    std::string buf;
    std::vector<std::uint64_t> values = {0, 1, 127, 128, 16383, 16384, ~0ULL};
    for (int i = 0; i < 1000; ++i) values.push_back(rng() >> (rng() % 64));
    for (auto v : values) put_varint(buf, v);
    Decoder d(buf);
    for (auto v : values) EXPECT_EQ(d.varint(), v);
    EXPECT_TRUE(d.done());
}

TEST(Varint, TruncationIsCorruption) {
    std::string buf;
    put_varint(buf, 1ULL << 40);
    buf.pop_back();
    Decoder d(buf);
    EXPECT_THROW(d.varint(), Error);
}

TEST(Fixed, LittleEndianLayout) {
    std::string buf;
    put_fixed32(buf, 0x01020304u);
    put_fixed64(buf, 0x1122334455667788ULL);
    EXPECT_EQ(to_hex(buf), "0403020188776655443322" "11");
    Decoder d(buf);
    EXPECT_EQ(d.fixed32(), 0x01020304u);
    EXPECT_EQ(d.fixed64(), 0x1122334455667788ULL);
}

TEST(Escape, RoundTripsControlCharacters) {
    std::string s = "a\tb\nc\\d\re";
    EXPECT_EQ(escape_field(s), "a\\tb\\nc\\\\d\\re");
    EXPECT_EQ(unescape_field(escape_field(s)), s);
}

TEST(Hex, RoundTrip) {
    EXPECT_EQ(from_hex(to_hex(std::string("\x00\xff\x10", 3))), std::string("\x00\xff\x10", 3));
    EXPECT_EQ(hex32(0xab), "000000ab");
    EXPECT_THROW(from_hex("abc"), Error);
}

TEST(Time, EpochRendering) {
    EXPECT_EQ(iso_time(0), "1970-01-01T00:00:00.000000Z");
    EXPECT_EQ(iso_time(1500000), "1970-01-01T00:00:01.500000Z");
}

TEST(Codec, DeflateRoundTripAndNoneIsIdentity) {
    std::string data;
    for (int i = 0; i < 5000; ++i) data += "ACGTACGT" + std::to_string(i % 17);
    auto packed = compress_block(Codec::kDeflate, data);
    EXPECT_LT(packed.size(), data.size());
    EXPECT_EQ(decompress_block(Codec::kDeflate, packed, data.size()), data);
    EXPECT_EQ(compress_block(Codec::kNone, data), data);
    EXPECT_EQ(codec_from_name(codec_name(Codec::kDeflate)), Codec::kDeflate);
}

TEST(Io, GzipInputIsSniffed) {
    testing::TempDir dir;
    std::string text = ">A x\nACGT\n";
    auto gz = dir / "r.fasta.gz";
    {
        gzFile f = gzopen(gz.c_str(), "wb");
        gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
        gzclose(f);
    }
    auto src = open_source(gz);
    LineReader lines(*src);
    std::string_view line;
    std::string got;
    while (lines.next(line)) got += std::string(line) + "\n";
    EXPECT_EQ(got, text);

    auto bytes = testing::slurp(gz);
    auto mem = memory_source(bytes);
    char buf[64];
    auto n = mem->read(buf, sizeof buf);
    EXPECT_EQ(std::string(buf, n), text);
}

TEST(Io, LineReaderTracksOffsetsAndFinalLine) {
    std::string text = "ab\ncd\nlast";
    auto src = memory_source(text);
    LineReader lines(*src, 2);
    std::string_view line;
    ASSERT_TRUE(lines.next(line));
    EXPECT_EQ(line, "ab");
    ASSERT_TRUE(lines.next(line));
    EXPECT_EQ(lines.line_offset(), 3u);
    ASSERT_TRUE(lines.next(line));
    EXPECT_EQ(line, "last");
    EXPECT_FALSE(lines.terminated());
    EXPECT_FALSE(lines.next(line));
}

TEST(Io, AtomicWriteReplacesContent) {
    testing::TempDir dir;
    write_file_atomic(dir / "f", "one");
    write_file_atomic(dir / "f", "two");
    EXPECT_EQ(read_file(dir / "f"), "two");
    EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator()), 1);
}

TEST(Io, FileLockIsExclusive) {
    testing::TempDir dir;
    auto a = FileLock::try_acquire(dir / "LOCK");
    ASSERT_TRUE(a);
    EXPECT_FALSE(FileLock::try_acquire(dir / "LOCK"));
    a.reset();
    EXPECT_TRUE(FileLock::try_acquire(dir / "LOCK"));
}

}  // namespace
}  // namespace vmdb
