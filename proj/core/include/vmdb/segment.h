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

// Immutable sorted segment files. A segment holds the row deltas written by a
// single release, in ascending row-key order, packed into compressed blocks.
//
// Layout:
//   block*        compressed record runs
//   index         per block: first key, last key, offset, sizes, crc, rows
//   footer        index offset/len/crc, codec, magic (32 bytes)
//
// The footer and index are verified when a segment is opened; each block's
// crc is verified when the block is read.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmdb/codec.h"
#include "vmdb/encoding.h"
#include "vmdb/io.h"

namespace vmdb {

/// One field cell written at the segment's release. An empty `value` records
/// that the field was removed from the entry.
struct CellValue {
    std::string field;
    std::optional<std::string> value;

    bool operator==(const CellValue&) const = default;
};

/// Everything one release wrote for one row.
struct RowDelta {
    std::string key;
    bool exists = false;
    std::vector<CellValue> cells;  // sorted by field name, unique

    bool operator==(const RowDelta&) const = default;
};

void encode_row(std::string& out, const RowDelta& row);
RowDelta decode_row(Decoder& in);

struct SegmentInfo {
    std::string file;
    std::uint64_t raw_bytes = 0;
    std::uint64_t file_bytes = 0;
    std::uint64_t rows = 0;
    std::uint64_t field_cells = 0;
    std::uint64_t exists_marks = 0;
    std::string min_key;
    std::string max_key;
    std::uint32_t index_crc = 0;
};

class SegmentWriter {
public:
    SegmentWriter(const fs::path& path, Codec codec, std::size_t block_bytes = 64 * 1024);

    /// Rows must arrive in strictly ascending key order.
    void add(const RowDelta& row);
    /// Flushes, syncs and closes the file.
    SegmentInfo finish(bool sync = true);

    std::uint64_t rows() const { return info_.rows; }

private:
    void flush_block();

    FileWriter out_;
    Codec codec_;
    std::size_t block_bytes_;
    std::string block_;
    std::string block_first_;
    std::string last_key_;
    std::uint64_t block_rows_ = 0;
    std::string index_;
    SegmentInfo info_;
    bool any_ = false;
};

class SegmentReader : public std::enable_shared_from_this<SegmentReader> {
public:
    struct BlockHandle {
        std::string first_key;
        std::string last_key;
        std::uint64_t offset = 0;
        std::uint32_t packed_len = 0;
        std::uint32_t raw_len = 0;
        std::uint32_t crc = 0;
        std::uint64_t rows = 0;
    };

    static std::shared_ptr<SegmentReader> open(const fs::path& path);
    ~SegmentReader();
    SegmentReader(const SegmentReader&) = delete;
    SegmentReader& operator=(const SegmentReader&) = delete;

    class Iterator {
    public:
        explicit Iterator(std::shared_ptr<const SegmentReader> reader);
        /// Positions at the first row with key >= `key`.
        void seek(std::string_view key);
        bool next(RowDelta& row);

    private:
        bool load_block(std::size_t i);

        std::shared_ptr<const SegmentReader> reader_;
        std::size_t block_ = 0;
        std::string data_;
        std::size_t pos_ = 0;
        bool loaded_ = false;
    };

    Iterator iterate() const { return Iterator(shared_from_this()); }
    std::optional<RowDelta> get(std::string_view key) const;

    std::uint32_t index_crc() const { return index_crc_; }
    Codec codec() const { return codec_; }
    const std::vector<BlockHandle>& blocks() const { return blocks_; }
    std::string read_block(std::size_t i) const;
    /// Reads every block and checks its crc.
    void verify_all() const;

private:
    SegmentReader(fs::path path, int fd) : path_(std::move(path)), fd_(fd) {}
    void load_index();

    fs::path path_;
    int fd_ = -1;
    Codec codec_ = Codec::kNone;
    std::uint32_t index_crc_ = 0;
    std::vector<BlockHandle> blocks_;
};

}  // namespace vmdb
