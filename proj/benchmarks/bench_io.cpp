#include <filesystem>

#include <benchmark/benchmark.h>
#include <unistd.h>

#include "fixtures.hpp"
#include "trajprune/log_io.hpp"

using namespace trajprune;

namespace {

std::filesystem::path scratch(const char* ext) {
  return std::filesystem::temp_directory_path() /
         ("trajprune_bench_" + std::to_string(::getpid()) + ext);
}

void BM_WriteLog(benchmark::State& state, LogFormat format, const char* ext) {
  const auto log = benchfix::random_log(static_cast<std::size_t>(state.range(0)), 10, 10);
  const auto path = scratch(ext);
  for (auto _ : state) write_log(log, path, format);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(std::filesystem::file_size(path)));
  std::filesystem::remove(path);
}
BENCHMARK_CAPTURE(BM_WriteLog, binary, LogFormat::Binary, ".ltrj")->Arg(10000);
BENCHMARK_CAPTURE(BM_WriteLog, jsonl, LogFormat::Jsonl, ".jsonl")->Arg(10000);

void BM_OpenLog(benchmark::State& state, LogFormat format, const char* ext) {
  const auto path = scratch(ext);
  write_log(benchfix::random_log(static_cast<std::size_t>(state.range(0)), 10, 10), path, format);
  for (auto _ : state) benchmark::DoNotOptimize(open_log(path));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(std::filesystem::file_size(path)));
  std::filesystem::remove(path);
}
BENCHMARK_CAPTURE(BM_OpenLog, binary, LogFormat::Binary, ".ltrj")->Arg(10000);
BENCHMARK_CAPTURE(BM_OpenLog, jsonl, LogFormat::Jsonl, ".jsonl")->Arg(10000);

}  // namespace
