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
#include <optional>
#include <string>
#include <string_view>

namespace vmdb {

/// Block compression codecs. The numeric id is persisted in manifests and
/// segment footers, so values must never be reused.
enum class Codec : std::uint8_t {
    kNone = 0,
    kDeflate = 1,  // zlib, fastest level
};

std::string_view codec_name(Codec c);
std::optional<Codec> codec_from_name(std::string_view name);

std::string compress_block(Codec codec, std::string_view raw);
std::string decompress_block(Codec codec, std::string_view packed, std::size_t raw_size);

}  // namespace vmdb
