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

#include "cli.h"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "vmdb/catalog.h"
#include "vmdb/encoding.h"
#include "vmdb/errors.h"
#include "vmdb/genfile.h"
#include "vmdb/ingest.h"
#include "vmdb/merge.h"
#include "vmdb/synthgen.h"

namespace vmdb::cli {

namespace {

struct Config {
    std::string root;
    std::uint32_t workers = 1;
    bool strict = false;
    std::string cache_budget;
};

struct Request {
    std::string table;
    std::string format;
    std::string fields;
    std::string file;
    std::string label;
    std::string version;
    std::string from;
    std::string to;
    std::string mask;
    std::uint32_t splits = 1;
    std::string run_id;
    std::string previous;
    std::string partial;
    std::string out;
    std::string input_format;
    std::string merge_format;
    std::string budget;
    std::string kind;
    std::string since;
    std::string until;
    std::uint64_t entries = 1000;
    double p_new = 0.05;
    double p_update = 0.45;
    double p_delete = 0.01;
    std::uint32_t releases = 2;
    std::uint64_t seed = 1;
};

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::kNotFound: return 2;
    case ErrorCode::kIo:
    case ErrorCode::kCorruption: return 4;
    case ErrorCode::kLockHeld: return 5;
    default: return 3;
    }
}

std::string one_line(std::string s) {
    for (auto& c : s) {
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    }
    return s;
}

std::uint64_t parse_bytes(const std::string& text) {
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        fail(ErrorCode::kValidation, "bad byte count '" + text + "'");
    }
    auto suffix = text.substr(pos);
    if (suffix.empty() || suffix == "B") return v;
    if (suffix == "K" || suffix == "KiB") return v << 10;
    if (suffix == "M" || suffix == "MiB") return v << 20;
    if (suffix == "G" || suffix == "GiB") return v << 30;
    fail(ErrorCode::kValidation, "bad byte count '" + text + "'");
}

std::string new_run_id() {
    auto v = static_cast<std::uint64_t>(now_micros()) ^ (static_cast<std::uint64_t>(::getpid()) << 40);
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%012llx", static_cast<unsigned long long>(v & 0xffffffffffffULL));
    return buf;
}

std::string join_paths(const std::vector<fs::path>& files) {
    std::string out;
    for (const auto& f : files) {
        if (!out.empty()) out += ',';
        out += f.string();
    }
    return out;
}

class Session {
public:
    Session(const Config& cfg, std::ostream& out)
        : cfg_(cfg),
          out_(out),
          store_(cfg.root),
          cache_(cfg.root),
          log_(fs::path(cfg.root) / "provenance.log"),
          gen_(store_, cache_, &log_) {}

    int table_create(const Request& r) {
        std::vector<std::string> fields;
        for (auto f : split(r.fields, ',')) {
            if (!trim(f).empty()) fields.emplace_back(trim(f));
        }
        Ingester ingester(store_, PluginRegistry::global(), &log_);
        auto h = ingester.register_table(r.table, r.format, fields);
        std::string joined;
        for (const auto& f : h.fields) joined += (joined.empty() ? "" : ",") + f;
        out_ << "table=" << h.name << " parser=" << h.parser << " fields=" << joined << "\n";
        return 0;
    }

    int add(const Request& r) {
        Ingester ingester(store_, PluginRegistry::global(), &log_);
        IngestOptions opts;
        opts.workers = cfg_.workers;
        opts.run_id = run_id(r);
        auto rep = ingester.add_release_file(r.table, r.file, r.label, opts);
        out_ << "table=" << rep.table << " seq=" << rep.seq << " label=" << rep.label
             << " added=" << rep.counts.added << " updated=" << rep.counts.updated
             << " unchanged=" << rep.counts.unchanged << " deleted=" << rep.counts.deleted
             << " cells=" << rep.cells_written << " bytes=" << rep.bytes_written << " run_id=" << opts.run_id
             << "\n";
        return 0;
    }

    int get(const Request& r) {
        auto handle = store_.table(r.table);
        auto to = store_.resolve_version(r.table, r.version);
        auto spec = GenerationSpec::full(r.table, to, mask_for(handle, r.mask), format_for(handle, r.format), r.splits);
        return generate(spec, r);
    }

    int increment(const Request& r) {
        auto handle = store_.table(r.table);
        auto from = store_.resolve_version(r.table, r.from);
        auto to = store_.resolve_version(r.table, r.to);
        auto spec = GenerationSpec::increment(r.table, from, to, mask_for(handle, r.mask),
                                              format_for(handle, r.format), r.splits);
        return generate(spec, r);
    }

    int merge(const Request& r) {
        auto handle = store_.table(r.table);
        auto from = store_.resolve_version(r.table, r.from);
        auto to = store_.resolve_version(r.table, r.to);
        auto id = run_id(r);
        auto spec = GenerationSpec::increment(r.table, from, to, mask_for(handle, r.mask),
                                              format_for(handle, r.input_format), r.splits);
        GenerateOptions gopts;
        gopts.run_id = id;
        auto plan = build_merge_plan(gen_, spec, r.merge_format.empty() ? "blast-tab" : r.merge_format, gopts);
        auto stats = merge_files(r.previous, r.partial, plan, r.out);

        std::ostringstream detail;
        detail << "out=" << r.out << " records=" << stats.output_records << " strategy=" << to_string(plan.strategy);
        log_.record(ProvenanceEvent{EventKind::kMerge, r.table, canonical_key(spec), id, "", detail.str()});
        log_.record(ProvenanceEvent{EventKind::kAccess, r.table, canonical_key(spec), id, "",
                                    "merge previous=" + r.previous + " partial=" + r.partial});

        out_ << "records=" << stats.output_records << " previous=" << stats.previous_records
             << " partial=" << stats.partial_records << " dropped_deleted=" << stats.dropped_deleted
             << " dropped_replaced=" << stats.dropped_replaced << " superseded=" << stats.superseded
             << " deletions=" << plan.deletions.size() << " strategy=" << to_string(plan.strategy);
        if (plan.correction) {
            out_ << " full_letters=" << plan.correction->full_db_letters
                 << " partial_letters=" << plan.correction->partial_db_letters;
        }
        out_ << " out=" << r.out << " run_id=" << id << "\n";
        return 0;
    }

    int cache_ls() {
        auto entries = cache_.list();
        std::uint64_t total = 0;
        for (const auto& e : entries) {
            total += e.byte_size;
            out_ << "key=" << e.key << " bytes=" << e.byte_size << " splits=" << e.files.size()
                 << " created=" << e.created_at << " last_access=" << e.last_access << "\n";
        }
        out_ << "entries=" << entries.size() << " bytes=" << total << "\n";
        return 0;
    }

    int cache_evict(const Request& r) {
        auto before = cache_.total_bytes();
        auto evicted = cache_.evict_oldest(parse_bytes(r.budget));
        auto after = cache_.total_bytes();
        std::string keys;
        for (const auto& k : evicted) keys += (keys.empty() ? "" : ",") + k;
        out_ << "evicted=" << evicted.size() << " freed=" << before - after << " bytes=" << after;
        if (!keys.empty()) out_ << " keys=" << keys;
        out_ << "\n";
        return 0;
    }

    int cache_verify() {
        auto n = cache_.list().size();
        auto bad = cache_.verify();
        out_ << "checked=" << n << " bad=" << bad.size();
        for (const auto& k : bad) out_ << " quarantined=" << k;
        out_ << "\n";
        return bad.empty() ? 0 : 4;
    }

    int log(const Request& r) {
        ProvenanceFilter f;
        if (!r.run_id.empty()) f.run_id = r.run_id;
        if (!r.table.empty()) f.table = r.table;
        if (!r.kind.empty()) {
            f.kind = event_kind_from_string(r.kind);
            if (!f.kind) fail(ErrorCode::kValidation, "unknown event kind '" + r.kind + "'");
        }
        if (!r.since.empty()) f.since = r.since;
        if (!r.until.empty()) f.until = r.until;
        auto events = log_.query(f);
        for (const auto& e : events) {
            out_ << "time=" << e.timestamp << " kind=" << to_string(e.kind) << " table=" << e.table
                 << " subject=" << e.subject << " run_id=" << e.run_id << " detail=" << one_line(e.detail) << "\n";
        }
        out_ << "events=" << events.size() << "\n";
        return 0;
    }

private:
    int generate(const GenerationSpec& spec, const Request& r) {
        GenerateOptions opts;
        opts.strict = cfg_.strict;
        opts.run_id = run_id(r);
        auto art = gen_.generate(spec, opts);
        log_.record(ProvenanceEvent{EventKind::kAccess, spec.table, art.key, opts.run_id, "",
                                    "files=" + join_paths(art.files)});
        out_ << "table=" << spec.table << " kind=" << to_string(spec.kind) << " from=" << spec.from_seq
             << " to=" << spec.to_seq << " entries=" << art.entry_count << " bytes=" << art.byte_size
             << " excluded=" << art.excluded_incomplete << " cache=" << (art.cache_hit ? "hit" : "miss");
        if (spec.kind == GenerationKind::kIncrement) {
            out_ << " deletions=" << art.deletions.size() << " deleted_file=" << art.deletions_file->string();
        }
        out_ << " key=" << art.key << " files=" << join_paths(art.files) << " run_id=" << opts.run_id << "\n";
        if (!cfg_.cache_budget.empty()) cache_.evict_oldest(parse_bytes(cfg_.cache_budget));
        return 0;
    }

    std::string run_id(const Request& r) {
        if (r.run_id.empty()) {
            if (generated_run_id_.empty()) generated_run_id_ = new_run_id();
            return generated_run_id_;
        }
        return r.run_id;
    }

    FieldMask mask_for(const TableHandle& h, const std::string& text) const {
        FieldMask m;
        if (text.empty()) {
            m.fields.insert(h.fields.begin(), h.fields.end());
        } else {
            m = FieldMask::parse(text);
        }
        // A sequence-less FASTA record is useless to a tool.
        if (h.parser == "fasta" && m.required.empty()) m.required = m.fields;
        m.validate();
        return m;
    }

    static std::string format_for(const TableHandle& h, const std::string& format) {
        return format.empty() ? h.parser : format;
    }

    const Config& cfg_;
    std::ostream& out_;
    Store store_;
    Cache cache_;
    ProvenanceLog log_;
    Generator gen_;
    std::string generated_run_id_;
};

int synth(const Request& r, std::ostream& out) {
    ChurnProfile p;
    p.n_entries = r.entries;
    p.p_new = r.p_new;
    p.p_update = r.p_update;
    p.p_delete = r.p_delete;
    p.seed = r.seed;
    if (r.releases == 0) fail(ErrorCode::kValidation, "releases must be at least 1");
    auto format = r.format.empty() ? std::string("fasta") : r.format;
    fs::create_directories(r.out);
    SynthGenerator gen(p, format);
    for (std::uint32_t k = 1; k <= r.releases; ++k) {
        if (k > 1) gen.advance();
        auto path = fs::path(r.out) / ("r" + std::to_string(k) + "." + format);
        gen.write_file(path);
        const auto& c = gen.last_churn();
        out << "release=" << k << " entries=" << gen.alive() << " added=" << (k > 1 ? c.added : gen.alive())
            << " updated=" << (k > 1 ? c.updated : 0) << " deleted=" << (k > 1 ? c.deleted : 0)
            << " file=" << path.string() << "\n";
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config cfg;
    Request req;
    if (const char* env = std::getenv("VMDB_ROOT"); env && *env) cfg.root = env;
    if (cfg.root.empty()) cfg.root = ".";

    CLI::App app{"vmdb: versioned meta-database store"};
    app.set_version_flag("--version-info", "vmdb 0.1.0");
    app.require_subcommand(1);
    app.add_option("--root", cfg.root, "Store root directory (default: $VMDB_ROOT or .)");
    app.add_option("--workers", cfg.workers, "Ingest workers")->check(CLI::PositiveNumber);
    app.add_flag("--strict", cfg.strict, "Fail instead of skipping incomplete entries");
    app.add_option("--cache-budget", cfg.cache_budget, "Evict cache entries down to this size after generating");

    auto* table = app.add_subcommand("table", "Table administration");
    table->require_subcommand(1);
    auto* create = table->add_subcommand("create", "Register a table bound to a parser");
    create->add_option("name", req.table, "Table name")->required();
    create->add_option("--format", req.format, "Parser id (fasta, dat, blast-tab)")->required();
    create->add_option("--fields", req.fields, "Comma-separated field set (default: parser fields)");

    auto* add = app.add_subcommand("add", "Ingest a release file");
    add->add_option("table", req.table)->required();
    add->add_option("file", req.file)->required();
    add->add_option("--label", req.label, "Release label");
    add->add_option("--run-id", req.run_id);

    auto* get = app.add_subcommand("get", "Generate a full historical version");
    get->add_option("table", req.table)->required();
    get->add_option("--version", req.version, "Release label or seq")->required();
    get->add_option("--mask", req.mask, "f1,f2[:required],...");
    get->add_option("--format", req.format, "Export format (default: table parser)");
    get->add_option("--splits", req.splits)->check(CLI::PositiveNumber);
    get->add_option("--run-id", req.run_id);

    auto* incr = app.add_subcommand("increment", "Generate the entries changed in (from, to]");
    incr->add_option("table", req.table)->required();
    incr->add_option("--from", req.from)->required();
    incr->add_option("--to", req.to)->required();
    incr->add_option("--mask", req.mask);
    incr->add_option("--format", req.format);
    incr->add_option("--splits", req.splits)->check(CLI::PositiveNumber);
    incr->add_option("--run-id", req.run_id);

    auto* merge = app.add_subcommand("merge", "Merge tool output over an increment into previous output");
    merge->add_option("previous", req.previous)->required()->check(CLI::ExistingFile);
    merge->add_option("partial", req.partial)->required()->check(CLI::ExistingFile);
    merge->add_option("--table", req.table)->required();
    merge->add_option("--from", req.from)->required();
    merge->add_option("--to", req.to)->required();
    merge->add_option("--format", req.merge_format, "Output format to merge (blast-tab or lines)");
    merge->add_option("--mask", req.mask, "Mask of the increment the tool read");
    merge->add_option("--input-format", req.input_format, "Export format of that increment");
    merge->add_option("--splits", req.splits)->check(CLI::PositiveNumber);
    merge->add_option("--out", req.out)->required();
    merge->add_option("--run-id", req.run_id);

    auto* cache = app.add_subcommand("cache", "Generated-file cache");
    cache->require_subcommand(1);
    auto* ls = cache->add_subcommand("ls", "List cached artifacts");
    auto* evict = cache->add_subcommand("evict", "Evict oldest artifacts down to a byte budget");
    evict->add_option("--budget", req.budget, "Bytes, optionally with K/M/G suffix")->required();
    auto* verify = cache->add_subcommand("verify", "Check artifact checksums");

    auto* logc = app.add_subcommand("log", "Query the provenance log");
    logc->add_option("--run-id", req.run_id);
    logc->add_option("--table", req.table);
    logc->add_option("--kind", req.kind, "INGEST, GENERATE, CACHE_HIT, MERGE or ACCESS");
    logc->add_option("--since", req.since);
    logc->add_option("--until", req.until);

    auto* syn = app.add_subcommand("synth", "Write a synthetic release sequence");
    syn->add_option("--entries", req.entries);
    syn->add_option("--p-new", req.p_new);
    syn->add_option("--p-update", req.p_update);
    syn->add_option("--p-delete", req.p_delete);
    syn->add_option("--releases", req.releases);
    syn->add_option("--seed", req.seed);
    syn->add_option("--format", req.format, "fasta or dat");
    syn->add_option("--out", req.out)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "vmdb 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error code=usage message=" << one_line(e.what()) << "\n";
        return 3;
    }

    try {
        if (*syn) return synth(req, out);
        Session s(cfg, out);
        if (*create) return s.table_create(req);
        if (*add) return s.add(req);
        if (*get) return s.get(req);
        if (*incr) return s.increment(req);
        if (*merge) return s.merge(req);
        if (*ls) return s.cache_ls();
        if (*evict) return s.cache_evict(req);
        if (*verify) return s.cache_verify();
        if (*logc) return s.log(req);
    } catch (const Error& e) {
        err << "error code=" << to_string(e.code()) << " message=" << one_line(e.what()) << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error code=io message=" << one_line(e.what()) << "\n";
        return 4;
    }
    return 3;
}

}  // namespace vmdb::cli
