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

#include <benchmark/benchmark.h>
#include <unistd.h>

#include <filesystem>

#include "vmdb/ingest.h"
#include "vmdb/synthgen.h"

namespace {

using namespace vmdb;

fs::path scratch(const char* tag) {
    return fs::temp_directory_path() / ("vmdb-bench-" + std::string(tag) + "-" + std::to_string(::getpid()));
}

// First release followed by one default-churn release; range(0) is the
// worker count, range(1) the entry count.
void BM_IngestRelease(benchmark::State& state) {
    ChurnProfile p;
    p.n_entries = static_cast<std::uint64_t>(state.range(1));
    auto texts = generate_release_texts(p, 2, "fasta");
    IngestOptions opt;
    opt.workers = static_cast<std::uint32_t>(state.range(0));
    std::uint64_t cells = 0;
    for (auto _ : state) {
        state.PauseTiming();
        auto dir = scratch("ingest");
        fs::remove_all(dir);
        {
            Store store(dir, StoreOptions{Codec::kDeflate, 64 * 1024, false});
            Ingester ing(store);
            ing.register_table("t", "fasta");
            state.ResumeTiming();
            for (const auto& t : texts) cells += ing.add_release_bytes("t", t, "", opt).cells_written;
            state.PauseTiming();
        }
        fs::remove_all(dir);
        state.ResumeTiming();
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * (texts[0].size() + texts[1].size())));
    state.counters["cells"] = benchmark::Counter(static_cast<double>(cells), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_IngestRelease)->Args({1, 2000})->Args({1, 20000})->Args({4, 20000})->Unit(benchmark::kMillisecond);

// The same release with a memory budget small enough to force spilled runs.
void BM_IngestSpilling(benchmark::State& state) {
    ChurnProfile p;
    p.n_entries = 20000;
    auto text = generate_release_texts(p, 1, "fasta")[0];
    IngestOptions opt;
    opt.memory_budget = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        state.PauseTiming();
        auto dir = scratch("spill");
        fs::remove_all(dir);
        {
            Store store(dir, StoreOptions{Codec::kDeflate, 64 * 1024, false});
            Ingester ing(store);
            ing.register_table("t", "fasta");
            state.ResumeTiming();
            ing.add_release_bytes("t", text, "", opt);
            state.PauseTiming();
        }
        fs::remove_all(dir);
        state.ResumeTiming();
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_IngestSpilling)->Arg(64 << 20)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
