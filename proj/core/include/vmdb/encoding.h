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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vmdb {

/// 64-bit FNV-1a. Stable across platforms and releases; used for partitioning,
/// split assignment and mask hashes.
std::uint64_t stable_hash(std::string_view bytes);

std::uint32_t crc32(std::string_view bytes, std::uint32_t seed = 0);

void put_varint(std::string& out, std::uint64_t v);
void put_fixed32(std::string& out, std::uint32_t v);
void put_fixed64(std::string& out, std::uint64_t v);
void put_bytes(std::string& out, std::string_view bytes);  // varint length + bytes

/// Cursor over an encoded buffer. Every getter throws kCorruption on underrun.
class Decoder {
public:
    explicit Decoder(std::string_view data) : data_(data) {}

    std::uint64_t varint();
    std::uint32_t fixed32();
    std::uint64_t fixed64();
    std::uint8_t byte();
    std::string_view bytes();
    bool done() const { return pos_ >= data_.size(); }
    std::size_t position() const { return pos_; }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);
std::string hex32(std::uint32_t v);

/// Backslash escaping for tab-separated text records (\t, \n, \r, \\).
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SS.uuuuuuZ".
std::string iso_now();
std::string iso_time(std::int64_t micros_since_epoch);
std::int64_t now_micros();

}  // namespace vmdb
