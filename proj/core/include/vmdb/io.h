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
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace vmdb {

namespace fs = std::filesystem;

/// Sequential byte input. Implementations may decompress on the fly.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    /// Reads up to `n` bytes; returns 0 at end of input.
    virtual std::size_t read(char* buf, std::size_t n) = 0;
};

/// Opens a file for streaming. gzip input is detected by its magic bytes and
/// inflated transparently.
std::unique_ptr<ByteSource> open_source(const fs::path& path);

/// Same sniffing rules over an in-memory buffer. The buffer must outlive the
/// source.
std::unique_ptr<ByteSource> memory_source(std::string_view bytes);

/// Splits a ByteSource into lines without the trailing '\n'. A final line
/// without a newline is still returned; `terminated()` tells them apart.
class LineReader {
public:
    explicit LineReader(ByteSource& src, std::size_t chunk = 1 << 16);

    bool next(std::string_view& line);
    /// Byte offset of the line most recently returned by next().
    std::uint64_t line_offset() const { return line_offset_; }
    bool terminated() const { return terminated_; }

private:
    bool fill();

    ByteSource& src_;
    std::string buf_;
    std::size_t pos_ = 0;
    std::size_t chunk_;
    std::uint64_t consumed_ = 0;
    std::uint64_t line_offset_ = 0;
    bool eof_ = false;
    bool terminated_ = true;
};

/// Buffered append-only file writer with explicit durability.
class FileWriter {
public:
    explicit FileWriter(const fs::path& path);
    ~FileWriter();
    FileWriter(const FileWriter&) = delete;
    FileWriter& operator=(const FileWriter&) = delete;

    void write(std::string_view bytes);
    void sync();
    void close();
    std::uint64_t size() const { return size_; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::FILE* file_ = nullptr;
    std::uint64_t size_ = 0;
};

std::string read_file(const fs::path& path);
std::string read_range(const fs::path& path, std::uint64_t offset, std::uint64_t length);

/// Writes `data` to a sibling temp file, syncs it, and renames it over `path`.
void write_file_atomic(const fs::path& path, std::string_view data);

void sync_directory(const fs::path& dir);

/// A temp-file name unique within this process and across processes.
fs::path unique_temp_name(const fs::path& final_path);

/// Advisory exclusive lock (flock) held for the lifetime of the object.
/// Released automatically if the process dies.
class FileLock {
public:
    static std::optional<FileLock> try_acquire(const fs::path& path);
    FileLock(FileLock&& other) noexcept;
    FileLock& operator=(FileLock&& other) noexcept;
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;
    ~FileLock();

private:
    explicit FileLock(int fd) : fd_(fd) {}
    int fd_ = -1;
};

/// Scratch directory removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const fs::path& parent, std::string_view prefix = "tmp");
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

}  // namespace vmdb
