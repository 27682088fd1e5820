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

#include "vmdb/catalog.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "vmdb/encoding.h"
#include "vmdb/errors.h"

namespace vmdb {

namespace {

constexpr std::string_view kMetaSuffix = ".meta";

bool valid_iso(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS with optional fraction and Z.
    if (s.size() < 19) return false;
    for (std::size_t i = 0; i < 19; ++i) {
        char c = s[i];
        bool sep = i == 4 || i == 7 || i == 10 || i == 13 || i == 16;
        if (sep) {
            char want = i == 10 ? 'T' : (i < 10 ? '-' : ':');
            if (c != want) return false;
        } else if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::kIngest: return "INGEST";
    case EventKind::kGenerate: return "GENERATE";
    case EventKind::kCacheHit: return "CACHE_HIT";
    case EventKind::kMerge: return "MERGE";
    case EventKind::kAccess: return "ACCESS";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
    for (auto k : {EventKind::kIngest, EventKind::kGenerate, EventKind::kCacheHit, EventKind::kMerge,
                   EventKind::kAccess}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

ProvenanceLog::ProvenanceLog(fs::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
}

ProvenanceEvent ProvenanceLog::record(ProvenanceEvent event) {
    std::lock_guard lock(mu_);
    auto now = std::max(now_micros(), last_micros_ + 1);
    last_micros_ = now;
    event.timestamp = iso_time(now);
    std::string line;
    for (auto* part : {&event.table, &event.subject, &event.run_id}) {
        line += '\t';
        line += escape_field(*part);
    }
    line = std::string(to_string(event.kind)) + line + '\t' + event.timestamp + '\t' +
           escape_field(event.detail) + '\n';
    // One write() per line with O_APPEND keeps lines whole across processes.
    int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) fail(ErrorCode::kIo, "cannot open provenance log '" + path_.string() + "'");
    auto n = ::write(fd, line.data(), line.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(line.size())) {
        fail(ErrorCode::kIo, "short write to provenance log '" + path_.string() + "'");
    }
    return event;
}

std::vector<ProvenanceEvent> ProvenanceLog::query(const ProvenanceFilter& filter) const {
    for (const auto* bound : {&filter.since, &filter.until}) {
        if (*bound && !valid_iso(**bound)) {
            fail(ErrorCode::kValidation, "malformed time bound '" + **bound + "'");
        }
    }
    if (filter.since && filter.until && *filter.since > *filter.until) {
        fail(ErrorCode::kValidation, "time range is inverted");
    }
    if (filter.run_id && filter.run_id->empty()) fail(ErrorCode::kValidation, "empty run id filter");
    if (filter.table && filter.table->empty()) fail(ErrorCode::kValidation, "empty table filter");

    std::vector<ProvenanceEvent> out;
    if (!fs::exists(path_)) return out;
    auto src = open_source(path_);
    LineReader lines(*src);
    std::string_view line;
    while (lines.next(line)) {
        if (line.empty()) continue;
        auto cols = split(line, '\t');
        if (cols.size() != 6) {
            fail(ErrorCode::kCorruption, "malformed provenance line at byte " + std::to_string(lines.line_offset()));
        }
        auto kind = event_kind_from_string(cols[0]);
        if (!kind) fail(ErrorCode::kCorruption, "unknown event kind '" + std::string(cols[0]) + "'");
        ProvenanceEvent e{*kind,
                          unescape_field(cols[1]),
                          unescape_field(cols[2]),
                          unescape_field(cols[3]),
                          std::string(cols[4]),
                          unescape_field(cols[5])};
        if (filter.run_id && e.run_id != *filter.run_id) continue;
        if (filter.table && e.table != *filter.table) continue;
        if (filter.kind && e.kind != *filter.kind) continue;
        if (filter.since && e.timestamp < *filter.since) continue;
        if (filter.until && e.timestamp > *filter.until) continue;
        out.push_back(std::move(e));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ProvenanceEvent& a, const ProvenanceEvent& b) { return a.timestamp < b.timestamp; });
    return out;
}

std::uint32_t file_crc32(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::kNotFound, "no such file '" + path.string() + "'");
    std::string buf(1 << 20, '\0');
    std::uint32_t crc = 0;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        auto n = static_cast<std::size_t>(in.gcount());
        if (n == 0) break;
        crc = crc32(std::string_view(buf.data(), n), crc);
    }
    return crc;
}

CacheLease::CacheLease(CacheLease&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

CacheLease::~CacheLease() {
    if (fd_ >= 0) ::close(fd_);
}

Cache::Cache(fs::path store_root) : dir_(std::move(store_root) / "cache") {
    fs::create_directories(dir_);
}

fs::path Cache::file_path(const std::string& key, std::uint32_t split) const {
    return dir_ / (key + ".p" + std::to_string(split));
}

std::optional<CacheEntry> Cache::read_entry(const std::string& key) const {
    auto meta_path = dir_ / (key + std::string(kMetaSuffix));
    std::string text;
    try {
        text = read_file(meta_path);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::kNotFound) return std::nullopt;
        throw;
    }
    CacheEntry entry;
    entry.key = key;
    std::map<std::string, std::string> kv;
    for (auto line : split(text, '\n')) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        kv[std::string(line.substr(0, eq))] = unescape_field(line.substr(eq + 1));
    }
    if (kv["key"] != key || !kv.count("splits")) return std::nullopt;
    std::uint32_t splits = 0;
    try {
        splits = static_cast<std::uint32_t>(std::stoul(kv["splits"]));
        entry.byte_size = std::stoull(kv["byte_size"]);
        for (std::uint32_t p = 0; p < splits; ++p) {
            entry.files.push_back(file_path(key, p));
            entry.checksums.push_back(static_cast<std::uint32_t>(std::stoul(kv.at("checksum.p" + std::to_string(p)), nullptr, 16)));
        }
        if (kv["deleted"] == "1") {
            entry.deleted = dir_ / (key + ".deleted");
            entry.deleted_checksum = static_cast<std::uint32_t>(std::stoul(kv.at("checksum.deleted"), nullptr, 16));
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    entry.created_at = kv["created_at"];
    entry.last_access = kv["last_access"];
    for (auto& [k, v] : kv) {
        if (k == "key" || k == "splits" || k == "byte_size" || k == "deleted" || k == "created_at" ||
            k == "last_access" || k.rfind("checksum.", 0) == 0) {
            continue;
        }
        entry.meta[k] = v;
    }
    return entry;
}

void Cache::write_meta(const CacheEntry& entry) const {
    std::map<std::string, std::string> kv = entry.meta;
    kv["key"] = entry.key;
    kv["splits"] = std::to_string(entry.files.size());
    kv["byte_size"] = std::to_string(entry.byte_size);
    kv["created_at"] = entry.created_at;
    kv["last_access"] = entry.last_access;
    kv["deleted"] = entry.deleted ? "1" : "0";
    for (std::size_t p = 0; p < entry.checksums.size(); ++p) {
        kv["checksum.p" + std::to_string(p)] = hex32(entry.checksums[p]);
    }
    if (entry.deleted) kv["checksum.deleted"] = hex32(entry.deleted_checksum);
    std::string text;
    for (const auto& [k, v] : kv) text += k + "=" + escape_field(v) + "\n";
    write_file_atomic(dir_ / (entry.key + std::string(kMetaSuffix)), text);
}

bool Cache::check(const CacheEntry& entry) const {
    try {
        for (std::size_t p = 0; p < entry.files.size(); ++p) {
            if (file_crc32(entry.files[p]) != entry.checksums[p]) return false;
        }
        if (entry.deleted && file_crc32(*entry.deleted) != entry.deleted_checksum) return false;
    } catch (const Error&) {
        return false;
    }
    return true;
}

void Cache::quarantine(const CacheEntry& entry) {
    auto qdir = dir_ / "quarantine" / (entry.key + "." + std::to_string(now_micros()));
    fs::create_directories(qdir);
    std::error_code ec;
    fs::rename(dir_ / (entry.key + std::string(kMetaSuffix)), qdir / (entry.key + std::string(kMetaSuffix)), ec);
    auto files = entry.files;
    if (entry.deleted) files.push_back(*entry.deleted);
    for (const auto& f : files) fs::rename(f, qdir / f.filename(), ec);
    write_file_atomic(qdir / "REASON", "checksum mismatch detected at " + iso_now() + "\n");
}

void Cache::remove(const CacheEntry& entry) {
    std::error_code ec;
    // Meta first: once it is gone the entry is invisible.
    fs::remove(dir_ / (entry.key + std::string(kMetaSuffix)), ec);
    for (const auto& f : entry.files) fs::remove(f, ec);
    if (entry.deleted) fs::remove(*entry.deleted, ec);
}

std::optional<CacheEntry> Cache::lookup(const std::string& key) {
    auto entry = read_entry(key);
    if (!entry) return std::nullopt;
    if (!check(*entry)) {
        quarantine(*entry);
        return std::nullopt;
    }
    entry->last_access = iso_now();
    write_meta(*entry);
    return entry;
}

CacheEntry Cache::insert(const std::string& key, const std::vector<fs::path>& files,
                         const std::optional<fs::path>& deleted,
                         const std::map<std::string, std::string>& meta) {
    if (!parse_key(key)) fail(ErrorCode::kValidation, "malformed cache key '" + key + "'");
    if (files.empty()) fail(ErrorCode::kValidation, "cache entry needs at least one file");
    CacheEntry entry;
    entry.key = key;
    entry.meta = meta;
    for (std::uint32_t p = 0; p < files.size(); ++p) {
        entry.checksums.push_back(file_crc32(files[p]));
        entry.byte_size += fs::file_size(files[p]);
        auto dest = file_path(key, p);
        fs::rename(files[p], dest);
        entry.files.push_back(dest);
    }
    if (deleted) {
        entry.deleted_checksum = file_crc32(*deleted);
        entry.byte_size += fs::file_size(*deleted);
        entry.deleted = dir_ / (key + ".deleted");
        fs::rename(*deleted, *entry.deleted);
    }
    entry.created_at = iso_now();
    entry.last_access = entry.created_at;
    write_meta(entry);
    return entry;
}

std::vector<CacheEntry> Cache::list() const {
    std::vector<CacheEntry> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir_, ec)) {
        auto name = e.path().filename().string();
        if (name.size() <= kMetaSuffix.size() || !name.ends_with(kMetaSuffix)) continue;
        if (auto entry = read_entry(name.substr(0, name.size() - kMetaSuffix.size()))) {
            out.push_back(std::move(*entry));
        }
    }
    std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.key < b.key; });
    return out;
}

std::uint64_t Cache::total_bytes() const {
    std::uint64_t total = 0;
    for (const auto& e : list()) total += e.byte_size;
    return total;
}

std::vector<std::string> Cache::quarantined() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir_ / "quarantine", ec)) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

CacheLease Cache::acquire_lease(const std::string& key) {
    auto path = dir_ / (key + ".lease");
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) fail(ErrorCode::kIo, "cannot open lease '" + path.string() + "': " + std::strerror(errno));
    if (::flock(fd, LOCK_SH) != 0) {
        ::close(fd);
        fail(ErrorCode::kIo, "cannot lock lease '" + path.string() + "'");
    }
    return CacheLease(fd);
}

bool Cache::leased(const std::string& key) const {
    auto path = dir_ / (key + ".lease");
    int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) return false;
    bool held = ::flock(fd, LOCK_EX | LOCK_NB) != 0;
    ::close(fd);
    return held;
}

std::vector<std::string> Cache::evict_oldest(std::uint64_t max_total_bytes) {
    auto entries = list();
    std::stable_sort(entries.begin(), entries.end(), [](const CacheEntry& a, const CacheEntry& b) {
        return a.created_at < b.created_at;
    });
    std::uint64_t total = 0;
    for (const auto& e : entries) total += e.byte_size;
    std::vector<std::string> evicted;
    for (const auto& e : entries) {
        if (total <= max_total_bytes) break;
        if (leased(e.key)) continue;
        remove(e);
        std::error_code ec;
        fs::remove(dir_ / (e.key + ".lease"), ec);
        total -= e.byte_size;
        evicted.push_back(e.key);
    }
    return evicted;
}

std::vector<std::string> Cache::verify() {
    std::vector<std::string> bad;
    for (const auto& e : list()) {
        if (!check(e)) {
            quarantine(e);
            bad.push_back(e.key);
        }
    }
    return bad;
}

}  // namespace vmdb
