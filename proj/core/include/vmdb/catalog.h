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

// Generated-file cache and provenance log.
//
// Cache layout under <root>/cache:
//   <key>.p<k>      split files
//   <key>.deleted   deletion sidecar (increments only)
//   <key>.meta      key=value metadata; written last, so its presence marks
//                   a complete entry
//   <key>.lease     shared flock held by generations using the key
//   quarantine/     entries that failed checksum verification

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vmdb/io.h"
#include "vmdb/model.h"

namespace vmdb {

enum class EventKind { kIngest, kGenerate, kCacheHit, kMerge, kAccess };

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

struct ProvenanceEvent {
    EventKind kind = EventKind::kAccess;
    std::string table;
    std::string subject;  // cache key or release seq
    std::string run_id;
    std::string timestamp;  // assigned by record()
    std::string detail;

    bool operator==(const ProvenanceEvent&) const = default;
};

struct ProvenanceFilter {
    std::optional<std::string> run_id;
    std::optional<std::string> table;
    std::optional<EventKind> kind;
    std::optional<std::string> since;  // inclusive ISO-8601 bounds
    std::optional<std::string> until;
};

/// Append-only, tab-separated event log. Appends from this process are
/// serialized and timestamps from one writer never go backwards.
class ProvenanceLog {
public:
    explicit ProvenanceLog(fs::path path);

    const fs::path& path() const { return path_; }

    /// Stamps and appends the event; returns it as written.
    ProvenanceEvent record(ProvenanceEvent event);
    /// Matching events in timestamp order. Throws kValidation for an inverted
    /// time range or a malformed bound.
    std::vector<ProvenanceEvent> query(const ProvenanceFilter& filter = {}) const;

private:
    fs::path path_;
    std::mutex mu_;
    std::int64_t last_micros_ = 0;
};

struct CacheEntry {
    std::string key;
    std::vector<fs::path> files;
    std::vector<std::uint32_t> checksums;
    std::optional<fs::path> deleted;
    std::uint32_t deleted_checksum = 0;
    std::string created_at;
    std::string last_access;
    std::uint64_t byte_size = 0;
    /// Free-form generation metadata (entry_count, residues, ...).
    std::map<std::string, std::string> meta;
};

/// Shared hold on a cache key. While any lease is live the key is not evicted.
class CacheLease {
public:
    CacheLease(CacheLease&& other) noexcept;
    CacheLease& operator=(CacheLease&&) = delete;
    CacheLease(const CacheLease&) = delete;
    ~CacheLease();

private:
    friend class Cache;
    explicit CacheLease(int fd) : fd_(fd) {}
    int fd_ = -1;
};

class Cache {
public:
    explicit Cache(fs::path store_root);

    const fs::path& dir() const { return dir_; }
    fs::path staging_dir() const { return dir_ / "tmp"; }
    fs::path file_path(const std::string& key, std::uint32_t split) const;

    /// Verifies every file's checksum. A mismatch moves the entry to
    /// quarantine and reports a miss. A hit refreshes last_access.
    std::optional<CacheEntry> lookup(const std::string& key);

    /// Moves staged files into place and publishes the entry. `files` holds
    /// one staged path per split; `deleted` the staged sidecar, if any.
    /// Reinserting a key replaces it.
    CacheEntry insert(const std::string& key, const std::vector<fs::path>& files,
                      const std::optional<fs::path>& deleted,
                      const std::map<std::string, std::string>& meta);

    /// Removes entries oldest-first until the total size is within the
    /// budget. Leased entries are skipped. Returns the evicted keys.
    std::vector<std::string> evict_oldest(std::uint64_t max_total_bytes);

    /// Checks every entry, quarantining bad ones. Returns the bad keys.
    std::vector<std::string> verify();

    std::vector<CacheEntry> list() const;
    std::uint64_t total_bytes() const;
    std::vector<std::string> quarantined() const;

    CacheLease acquire_lease(const std::string& key);

private:
    std::optional<CacheEntry> read_entry(const std::string& key) const;
    void write_meta(const CacheEntry& entry) const;
    bool check(const CacheEntry& entry) const;
    void quarantine(const CacheEntry& entry);
    void remove(const CacheEntry& entry);
    bool leased(const std::string& key) const;

    fs::path dir_;
};

/// crc32 of a whole file, streamed.
std::uint32_t file_crc32(const fs::path& path);

}  // namespace vmdb
