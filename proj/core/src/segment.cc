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

#include "vmdb/segment.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "vmdb/errors.h"

namespace vmdb {

namespace {

constexpr std::uint64_t kSegmentMagic = 0x3147455342444d56ULL;  // "VMDBSEG1"
constexpr std::size_t kFooterSize = 32;

}  // namespace

void encode_row(std::string& out, const RowDelta& row) {
    put_bytes(out, row.key);
    out.push_back(static_cast<char>(row.exists ? 1 : 0));
    put_varint(out, row.cells.size());
    for (const auto& c : row.cells) {
        put_bytes(out, c.field);
        out.push_back(static_cast<char>(c.value ? 1 : 0));
        if (c.value) put_bytes(out, *c.value);
    }
}

RowDelta decode_row(Decoder& in) {
    RowDelta row;
    row.key = std::string(in.bytes());
    row.exists = (in.byte() & 1) != 0;
    auto n = in.varint();
    row.cells.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        CellValue c;
        c.field = std::string(in.bytes());
        if (in.byte() & 1) c.value = std::string(in.bytes());
        row.cells.push_back(std::move(c));
    }
    return row;
}

SegmentWriter::SegmentWriter(const fs::path& path, Codec codec, std::size_t block_bytes)
    : out_(path), codec_(codec), block_bytes_(block_bytes) {
    info_.file = path.filename().string();
}

void SegmentWriter::add(const RowDelta& row) {
    if (any_ && row.key <= last_key_) {
        fail(row.key == last_key_ ? ErrorCode::kDuplicateCell : ErrorCode::kContract,
             "segment rows must be strictly ascending (key '" + row.key + "')");
    }
    if (row.key.empty()) fail(ErrorCode::kValidation, "empty row key");
    if (block_rows_ == 0) block_first_ = row.key;
    encode_row(block_, row);
    ++block_rows_;
    last_key_ = row.key;
    if (!any_) info_.min_key = row.key;
    any_ = true;
    info_.rows++;
    info_.field_cells += row.cells.size();
    if (row.exists) info_.exists_marks++;
    if (block_.size() >= block_bytes_) flush_block();
}

void SegmentWriter::flush_block() {
    if (block_rows_ == 0) return;
    auto packed = compress_block(codec_, block_);
    auto offset = out_.size();
    out_.write(packed);
    put_bytes(index_, block_first_);
    put_bytes(index_, last_key_);
    put_fixed64(index_, offset);
    put_fixed32(index_, static_cast<std::uint32_t>(packed.size()));
    put_fixed32(index_, static_cast<std::uint32_t>(block_.size()));
    put_fixed32(index_, crc32(packed));
    put_varint(index_, block_rows_);
    info_.raw_bytes += block_.size();
    block_.clear();
    block_rows_ = 0;
}

SegmentInfo SegmentWriter::finish(bool sync) {
    flush_block();
    auto index_offset = out_.size();
    out_.write(index_);
    std::string footer;
    put_fixed64(footer, index_offset);
    put_fixed32(footer, static_cast<std::uint32_t>(index_.size()));
    info_.index_crc = crc32(index_);
    put_fixed32(footer, info_.index_crc);
    put_fixed32(footer, static_cast<std::uint32_t>(codec_));
    put_fixed32(footer, 0);
    put_fixed64(footer, kSegmentMagic);
    out_.write(footer);
    if (sync) out_.sync();
    out_.close();
    info_.max_key = last_key_;
    info_.file_bytes = out_.size();
    return info_;
}

std::shared_ptr<SegmentReader> SegmentReader::open(const fs::path& path) {
    int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) {
        if (errno == ENOENT) fail(ErrorCode::kCorruption, "missing segment '" + path.string() + "'");
        fail(ErrorCode::kIo, "cannot open segment '" + path.string() + "': " + std::strerror(errno));
    }
    std::shared_ptr<SegmentReader> r(new SegmentReader(path, fd));
    r->load_index();
    return r;
}

SegmentReader::~SegmentReader() {
    if (fd_ >= 0) ::close(fd_);
}

namespace {

std::string pread_exact(int fd, const fs::path& path, std::uint64_t offset, std::size_t len) {
    std::string out(len, '\0');
    std::size_t done = 0;
    while (done < len) {
        auto n = ::pread(fd, out.data() + done, len - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) continue;
            fail(ErrorCode::kIo, "read failed on '" + path.string() + "'");
        }
        if (n == 0) fail(ErrorCode::kCorruption, "short read in segment '" + path.string() + "'");
        done += static_cast<std::size_t>(n);
    }
    return out;
}

}  // namespace

void SegmentReader::load_index() {
    auto size = ::lseek(fd_, 0, SEEK_END);
    if (size < static_cast<off_t>(kFooterSize)) {
        fail(ErrorCode::kCorruption, "segment too small '" + path_.string() + "'");
    }
    auto footer = pread_exact(fd_, path_, static_cast<std::uint64_t>(size) - kFooterSize, kFooterSize);
    Decoder fd(footer);
    auto index_offset = fd.fixed64();
    auto index_len = fd.fixed32();
    index_crc_ = fd.fixed32();
    auto codec = fd.fixed32();
    fd.fixed32();
    if (fd.fixed64() != kSegmentMagic) fail(ErrorCode::kCorruption, "bad segment magic in '" + path_.string() + "'");
    if (index_offset + index_len + kFooterSize != static_cast<std::uint64_t>(size)) {
        fail(ErrorCode::kCorruption, "inconsistent segment footer in '" + path_.string() + "'");
    }
    if (codec > static_cast<std::uint32_t>(Codec::kDeflate)) {
        fail(ErrorCode::kCorruption, "unknown codec in '" + path_.string() + "'");
    }
    codec_ = static_cast<Codec>(codec);
    auto index = pread_exact(fd_, path_, index_offset, index_len);
    if (crc32(index) != index_crc_) fail(ErrorCode::kCorruption, "index checksum mismatch in '" + path_.string() + "'");
    Decoder in(index);
    while (!in.done()) {
        BlockHandle b;
        b.first_key = std::string(in.bytes());
        b.last_key = std::string(in.bytes());
        b.offset = in.fixed64();
        b.packed_len = in.fixed32();
        b.raw_len = in.fixed32();
        b.crc = in.fixed32();
        b.rows = in.varint();
        blocks_.push_back(std::move(b));
    }
}

std::string SegmentReader::read_block(std::size_t i) const {
    const auto& b = blocks_.at(i);
    auto packed = pread_exact(fd_, path_, b.offset, b.packed_len);
    if (crc32(packed) != b.crc) {
        fail(ErrorCode::kCorruption, "block checksum mismatch in '" + path_.string() + "'");
    }
    return decompress_block(codec_, packed, b.raw_len);
}

void SegmentReader::verify_all() const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) read_block(i);
}

std::optional<RowDelta> SegmentReader::get(std::string_view key) const {
    // First block whose last key is >= key.
    auto it = std::lower_bound(blocks_.begin(), blocks_.end(), key,
                               [](const BlockHandle& b, std::string_view k) { return b.last_key < k; });
    if (it == blocks_.end() || key < it->first_key) return std::nullopt;
    auto data = read_block(static_cast<std::size_t>(it - blocks_.begin()));
    Decoder in(data);
    while (!in.done()) {
        auto row = decode_row(in);
        if (row.key == key) return row;
        if (row.key > key) break;
    }
    return std::nullopt;
}

SegmentReader::Iterator::Iterator(std::shared_ptr<const SegmentReader> reader)
    : reader_(std::move(reader)) {}

bool SegmentReader::Iterator::load_block(std::size_t i) {
    if (i >= reader_->blocks_.size()) {
        block_ = i;
        loaded_ = true;
        data_.clear();
        pos_ = 0;
        return false;
    }
    block_ = i;
    data_ = reader_->read_block(i);
    pos_ = 0;
    loaded_ = true;
    return true;
}

void SegmentReader::Iterator::seek(std::string_view key) {
    const auto& blocks = reader_->blocks_;
    auto it = std::lower_bound(blocks.begin(), blocks.end(), key,
                               [](const BlockHandle& b, std::string_view k) { return b.last_key < k; });
    if (!load_block(static_cast<std::size_t>(it - blocks.begin()))) return;
    Decoder in(data_);
    while (!in.done()) {
        auto start = in.position();
        auto row = decode_row(in);
        if (row.key >= key) {
            pos_ = start;
            return;
        }
    }
    pos_ = data_.size();
}

bool SegmentReader::Iterator::next(RowDelta& row) {
    if (!loaded_ && !load_block(0)) return false;
    while (pos_ >= data_.size()) {
        if (!load_block(block_ + 1)) return false;
    }
    Decoder in(std::string_view(data_).substr(pos_));
    row = decode_row(in);
    pos_ += in.position();
    return true;
}

}  // namespace vmdb
