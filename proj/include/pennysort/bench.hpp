#pragma once

#include <sys/resource.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <system_error>

#include "pennysort/compare.hpp"
#include "pennysort/metrics.hpp"
#include "pennysort/recgen.hpp"
#include "pennysort/sort.hpp"

namespace pennysort {

inline constexpr std::uint64_t kDatamationRecords = 1'000'000;

struct BenchOptions
{
    BenchMode mode = BenchMode::datamation;
    SortConfig sort;  // input/output are filled in per probe
    std::optional<PriceModel> price;
    Category category = Category::indy;
    std::string product = "pennysort";
    std::uint64_t records = kDatamationRecords;  // pennysort size, or first probe for the minute modes
    std::uint64_t seed = 1;
    double time_limit_seconds = 60.0;
    int max_probes = 8;
    std::filesystem::path work_dir;  // generated input and sorted output live here
};

struct ProbeOutcome
{
    bool passed = false;
    BenchmarkResult result;
};

struct SearchOutcome
{
    std::uint64_t largest_passing = 0;
    std::optional<ProbeOutcome> best;
    int probes = 0;
};

/// Largest size for which `probe` passes: doubling from `start` until the
/// first failure, then bisection, using at most `max_probes` probes.
template <typename Probe>
SearchOutcome search_largest(std::uint64_t start, int max_probes, Probe&& probe)
{
    SearchOutcome out;
    std::uint64_t lo = 0;
    std::optional<std::uint64_t> hi;
    std::uint64_t n = std::max<std::uint64_t>(start, 1);
    while (out.probes < max_probes && !hi) {
        ProbeOutcome p = probe(n);
        ++out.probes;
        if (p.passed) {
            lo = n;
            out.best = std::move(p);
            n *= 2;
        } else {
            hi = n;
        }
    }
    while (out.probes < max_probes && hi && *hi - lo > 1) {
        const std::uint64_t mid = lo + (*hi - lo) / 2;
        ProbeOutcome p = probe(mid);
        ++out.probes;
        if (p.passed) {
            lo = mid;
            out.best = std::move(p);
        } else {
            hi = mid;
        }
    }
    out.largest_passing = lo;
    return out;
}

namespace detail {

struct CpuTimes
{
    double user = 0;
    double kernel = 0;
};

inline CpuTimes cpu_now()
{
    rusage ru{};
    ::getrusage(RUSAGE_SELF, &ru);
    auto secs = [](const timeval& tv) { return static_cast<double>(tv.tv_sec) + tv.tv_usec / 1e6; };
    return {secs(ru.ru_utime), secs(ru.ru_stime)};
}

// Generates `records` records, sorts them, validates the output against the
// input checksum. Generation time is not part of the measurement.
inline BenchmarkResult measure_sort(const BenchOptions& opts, std::uint64_t records)
{
    const auto input = opts.work_dir / "bench.in";
    const auto output = opts.work_dir / "bench.out";
    struct Cleanup
    {
        std::filesystem::path a, b;
        ~Cleanup()
        {
            std::error_code ec;
            std::filesystem::remove(a, ec);
            std::filesystem::remove(b, ec);
        }
    } cleanup{input, output};

    GenSpec spec;
    spec.record_count = records;
    spec.seed = opts.seed;
    generate_file(spec, input, stream_config(opts.sort));
    const ValidationReport before = validate_file(input, opts.sort);

    SortConfig config = opts.sort;
    config.input = input;
    config.output = output;
    if (config.temp_dir.empty())
        config.temp_dir = opts.work_dir;

    const CpuTimes cpu0 = cpu_now();
    const SortSummary sorted = sort(config);
    const CpuTimes cpu1 = cpu_now();

    const ValidationReport after = validate_file(output, opts.sort);

    BenchmarkResult r;
    r.product = opts.product;
    r.mode = opts.mode;
    r.category = opts.category;
    r.elapsed_seconds = sorted.elapsed_seconds;
    r.cpu_user_seconds = cpu1.user - cpu0.user;
    r.cpu_kernel_seconds = cpu1.kernel - cpu0.kernel;
    r.bytes_sorted = sorted.bytes;
    r.records_sorted = sorted.records;
    r.valid = after.is_sorted && after.record_count == before.record_count &&
              after.key_checksum == before.key_checksum && after.total_bytes == before.total_bytes;
    return r;
}

} // namespace detail

/// Runs one benchmark and returns a result that always reflects validation of
/// the sorted output.
///
///  - datamation: sort opts.records (10^6 by default) and report elapsed time.
///  - pennysort: sort opts.records and check elapsed against the penny budget.
///  - minutesort / perf_price: search for the largest input sorted within the
///    time limit, then compute GiB per dollar for that window.
inline BenchmarkResult run_benchmark(const BenchOptions& opts)
{
    if (opts.work_dir.empty())
        throw usage_error("benchmark needs a work directory");
    std::filesystem::create_directories(opts.work_dir);
    if (opts.price)
        opts.price->check();

    switch (opts.mode) {
    case BenchMode::datamation:
        return detail::measure_sort(opts, opts.records);
    case BenchMode::pennysort: {
        if (!opts.price)
            throw usage_error("pennysort needs a system price");
        BenchmarkResult r = detail::measure_sort(opts, opts.records);
        apply_penny_budget(r, *opts.price);
        return r;
    }
    case BenchMode::minutesort:
    case BenchMode::perf_price: {
        if (opts.mode == BenchMode::perf_price && !opts.price)
            throw usage_error("perf_price needs a system price");
        auto outcome = search_largest(opts.records, opts.max_probes, [&](std::uint64_t n) {
            ProbeOutcome p;
            p.result = detail::measure_sort(opts, n);
            p.passed = p.result.valid && p.result.elapsed_seconds <= opts.time_limit_seconds;
            return p;
        });
        BenchmarkResult r;
        if (outcome.best) {
            r = outcome.best->result;
        } else {
            r.product = opts.product;
            r.mode = opts.mode;
            r.category = opts.category;
            r.valid = false;
        }
        r.budget_seconds = opts.time_limit_seconds;
        if (opts.price)
            r.gb_per_dollar = gb_per_dollar(r.bytes_sorted, *opts.price, opts.time_limit_seconds);
        return r;
    }
    }
    throw usage_error("unknown benchmark mode");
}

} // namespace pennysort
