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

#include "vmdb/codec.h"

#include <zlib.h>

#include "vmdb/errors.h"

namespace vmdb {

std::string_view codec_name(Codec c) {
    switch (c) {
    case Codec::kNone: return "none";
    case Codec::kDeflate: return "deflate";
    }
    return "unknown";
}

std::optional<Codec> codec_from_name(std::string_view name) {
    if (name == "none") return Codec::kNone;
    if (name == "deflate") return Codec::kDeflate;
    return std::nullopt;
}

std::string compress_block(Codec codec, std::string_view raw) {
    if (codec == Codec::kNone) return std::string(raw);
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string out(bound, '\0');
    int rc = compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                       reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                       Z_BEST_SPEED);
    if (rc != Z_OK) fail(ErrorCode::kIo, "deflate failed");
    out.resize(bound);
    return out;
}

std::string decompress_block(Codec codec, std::string_view packed, std::size_t raw_size) {
    if (codec == Codec::kNone) {
        if (packed.size() != raw_size) fail(ErrorCode::kCorruption, "stored block size mismatch");
        return std::string(packed);
    }
    std::string out(raw_size, '\0');
    uLongf len = static_cast<uLongf>(raw_size);
    int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &len,
                        reinterpret_cast<const Bytef*>(packed.data()),
                        static_cast<uLong>(packed.size()));
    if (rc != Z_OK || len != raw_size) fail(ErrorCode::kCorruption, "inflate failed");
    return out;
}

}  // namespace vmdb
