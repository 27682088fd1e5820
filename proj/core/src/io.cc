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

#include "vmdb/io.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "vmdb/errors.h"

namespace vmdb {

namespace {

[[noreturn]] void io_fail(const std::string& what, const fs::path& path) {
    fail(errno == ENOENT ? ErrorCode::kNotFound : ErrorCode::kIo, what + " '" + path.string() + "': " + std::strerror(errno));
}

class FileSource : public ByteSource {
public:
    explicit FileSource(const fs::path& path) : path_(path) {
        // gzopen reads non-gzip files transparently.
        file_ = gzopen(path.c_str(), "rb");
        if (!file_) io_fail("cannot open", path);
        gzbuffer(file_, 1 << 17);
    }
    ~FileSource() override {
        if (file_) gzclose(file_);
    }

    std::size_t read(char* buf, std::size_t n) override {
        int got = gzread(file_, buf, static_cast<unsigned>(std::min<std::size_t>(n, 1 << 30)));
        if (got < 0) {
            int err = 0;
            const char* msg = gzerror(file_, &err);
            fail(ErrorCode::kIo, "read failed on '" + path_.string() + "': " + msg);
        }
        return static_cast<std::size_t>(got);
    }

private:
    fs::path path_;
    gzFile file_ = nullptr;
};

class PlainMemorySource : public ByteSource {
public:
    explicit PlainMemorySource(std::string_view bytes) : bytes_(bytes) {}

    std::size_t read(char* buf, std::size_t n) override {
        n = std::min(n, bytes_.size() - pos_);
        std::memcpy(buf, bytes_.data() + pos_, n);
        pos_ += n;
        return n;
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

class GzipMemorySource : public ByteSource {
public:
    explicit GzipMemorySource(std::string_view bytes) {
        std::memset(&zs_, 0, sizeof zs_);
        // 16 + MAX_WBITS: gzip wrapper; concatenated members are handled below.
        if (inflateInit2(&zs_, 16 + MAX_WBITS) != Z_OK) fail(ErrorCode::kIo, "inflateInit failed");
        zs_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
        zs_.avail_in = static_cast<uInt>(bytes.size());
    }
    ~GzipMemorySource() override { inflateEnd(&zs_); }

    std::size_t read(char* buf, std::size_t n) override {
        if (done_) return 0;
        zs_.next_out = reinterpret_cast<Bytef*>(buf);
        zs_.avail_out = static_cast<uInt>(std::min<std::size_t>(n, 1 << 30));
        while (zs_.avail_out > 0) {
            int rc = inflate(&zs_, Z_NO_FLUSH);
            if (rc == Z_STREAM_END) {
                if (zs_.avail_in == 0) {
                    done_ = true;
                    break;
                }
                inflateReset(&zs_);
                continue;
            }
            if (rc == Z_BUF_ERROR && zs_.avail_in == 0) {
                fail(ErrorCode::kMalformedInput, "truncated gzip stream");
            }
            if (rc != Z_OK) fail(ErrorCode::kMalformedInput, "corrupt gzip stream");
        }
        return static_cast<std::size_t>(reinterpret_cast<char*>(zs_.next_out) - buf);
    }

private:
    z_stream zs_;
    bool done_ = false;
};

}  // namespace

std::unique_ptr<ByteSource> open_source(const fs::path& path) {
    return std::make_unique<FileSource>(path);
}

std::unique_ptr<ByteSource> memory_source(std::string_view bytes) {
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
        static_cast<unsigned char>(bytes[1]) == 0x8b) {
        return std::make_unique<GzipMemorySource>(bytes);
    }
    return std::make_unique<PlainMemorySource>(bytes);
}

LineReader::LineReader(ByteSource& src, std::size_t chunk) : src_(src), chunk_(chunk) {}

bool LineReader::fill() {
    if (eof_) return false;
    if (pos_ > 0) {
        consumed_ += pos_;
        buf_.erase(0, pos_);
        pos_ = 0;
    }
    auto old = buf_.size();
    buf_.resize(old + chunk_);
    auto got = src_.read(buf_.data() + old, chunk_);
    buf_.resize(old + got);
    if (got == 0) eof_ = true;
    return got > 0;
}

bool LineReader::next(std::string_view& line) {
    while (true) {
        auto nl = buf_.find('\n', pos_);
        if (nl != std::string::npos) {
            line_offset_ = consumed_ + pos_;
            line = std::string_view(buf_).substr(pos_, nl - pos_);
            pos_ = nl + 1;
            terminated_ = true;
            return true;
        }
        if (!fill()) {
            if (pos_ < buf_.size()) {
                line_offset_ = consumed_ + pos_;
                line = std::string_view(buf_).substr(pos_);
                pos_ = buf_.size();
                terminated_ = false;
                return true;
            }
            return false;
        }
    }
}

FileWriter::FileWriter(const fs::path& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) io_fail("cannot create", path);
    std::setvbuf(file_, nullptr, _IOFBF, 1 << 17);
}

FileWriter::~FileWriter() {
    if (file_) std::fclose(file_);
}

void FileWriter::write(std::string_view bytes) {
    if (bytes.empty()) return;
    if (std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size()) io_fail("write failed", path_);
    size_ += bytes.size();
}

void FileWriter::sync() {
    if (std::fflush(file_) != 0) io_fail("flush failed", path_);
    if (::fsync(fileno(file_)) != 0) io_fail("fsync failed", path_);
}

void FileWriter::close() {
    if (!file_) return;
    auto* f = file_;
    file_ = nullptr;
    if (std::fclose(f) != 0) io_fail("close failed", path_);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!fs::exists(path)) fail(ErrorCode::kNotFound, "no such file '" + path.string() + "'");
        io_fail("cannot open", path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::string read_range(const fs::path& path, std::uint64_t offset, std::uint64_t length) {
    int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) io_fail("cannot open", path);
    std::string out(length, '\0');
    std::uint64_t done = 0;
    while (done < length) {
        auto n = ::pread(fd, out.data() + done, length - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            io_fail("read failed", path);
        }
        if (n == 0) {
            ::close(fd);
            fail(ErrorCode::kCorruption, "unexpected end of file in '" + path.string() + "'");
        }
        done += static_cast<std::uint64_t>(n);
    }
    ::close(fd);
    return out;
}

fs::path unique_temp_name(const fs::path& final_path) {
    static std::atomic<std::uint64_t> counter{0};
    auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    return final_path.string() + ".tmp." + std::to_string(::getpid()) + "." +
           std::to_string(tid % 100000) + "." + std::to_string(counter++);
}

void sync_directory(const fs::path& dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd < 0) io_fail("cannot open directory", dir);
    ::fsync(fd);
    ::close(fd);
}

void write_file_atomic(const fs::path& path, std::string_view data) {
    auto tmp = unique_temp_name(path);
    {
        FileWriter w(tmp);
        w.write(data);
        w.sync();
        w.close();
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorCode::kIo, "rename to '" + path.string() + "' failed");
    }
    sync_directory(path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::optional<FileLock> FileLock::try_acquire(const fs::path& path) {
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) io_fail("cannot open lock file", path);
    if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd);
        return std::nullopt;
    }
    return FileLock(fd);
}

FileLock::FileLock(FileLock&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

FileLock& FileLock::operator=(FileLock&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

FileLock::~FileLock() {
    if (fd_ >= 0) ::close(fd_);
}

ScratchDir::ScratchDir(const fs::path& parent, std::string_view prefix) {
    fs::create_directories(parent);
    static std::atomic<std::uint64_t> counter{0};
    path_ = parent / (std::string(prefix) + "-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter++));
    fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

}  // namespace vmdb
