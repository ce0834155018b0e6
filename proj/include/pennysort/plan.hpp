#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "pennysort/compare.hpp"
#include "pennysort/error.hpp"

namespace pennysort {

enum class SortMode { one_pass, two_pass };

inline const char* to_string(SortMode mode)
{
    return mode == SortMode::one_pass ? "one-pass" : "two-pass";
}

struct SortPlan
{
    SortMode mode = SortMode::one_pass;
    std::uint64_t input_bytes = 0;
    std::uint64_t run_bytes = 0;            // two-pass only
    std::uint64_t estimated_run_count = 1;  // k
    std::uint64_t merge_buffer_bytes = 0;
    std::uint64_t working_memory_bytes = 0;

    std::string description() const;
};

namespace detail {

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

inline std::uint64_t isqrt_ceil(long double x)
{
    auto r = static_cast<std::uint64_t>(std::sqrt(x));
    while (static_cast<long double>(r) * r < x)
        ++r;
    while (r > 0 && static_cast<long double>(r - 1) * (r - 1) >= x)
        --r;
    return r;
}

// Largest multiple of transfer usable as a run within `memory`, or 0.
inline std::uint64_t max_run_bytes(std::uint64_t memory, std::uint64_t transfer)
{
    return memory / transfer * transfer;
}

inline bool fan_in_fits(std::uint64_t input, std::uint64_t run, std::uint64_t transfer,
                        std::uint64_t memory)
{
    return run > 0 && (ceil_div(input, run) + 1) * transfer <= memory;
}

// Smallest memory (a multiple of transfer) for which some run size works.
inline std::uint64_t min_two_pass_memory(std::uint64_t input, std::uint64_t transfer)
{
    std::uint64_t lo = 1;
    std::uint64_t hi = 2;
    while (!fan_in_fits(input, hi * transfer, transfer, hi * transfer))
        hi *= 2;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (fan_in_fits(input, mid * transfer, transfer, mid * transfer))
            hi = mid;
        else
            lo = mid + 1;
    }
    return hi * transfer;
}

} // namespace detail

/// Square-root run size: the smallest multiple of the transfer size that is
/// at least sqrt(input_bytes * transfer_bytes).
inline std::uint64_t sqrt_run_bytes(std::uint64_t input_bytes, std::uint64_t transfer_bytes)
{
    const long double product = static_cast<long double>(input_bytes) * transfer_bytes;
    const std::uint64_t root = detail::isqrt_ceil(product);
    return std::max<std::uint64_t>(transfer_bytes, detail::ceil_div(root, transfer_bytes) * transfer_bytes);
}

/// Chooses between an in-memory sort and a two-pass (runs + one merge) sort.
///
/// Two-pass runs start at the square-root size and grow, one transfer at a
/// time, until k runs plus one output buffer fit in memory. Throws an
/// `infeasible` error naming the minimum memory when no run size works.
inline SortPlan plan_sort(std::uint64_t input_bytes, const SortConfig& config,
                          std::uint64_t available_memory_bytes)
{
    const std::uint64_t transfer = config.transfer_bytes;
    if (transfer == 0 || transfer % kPageBytes != 0)
        throw usage_error("transfer size must be a positive multiple of 4096");
    if (available_memory_bytes < 4 * transfer)
        throw usage_error("memory budget " + std::to_string(available_memory_bytes) +
                          " bytes is below the minimum of four transfers (" +
                          std::to_string(4 * transfer) + " bytes)");

    SortPlan plan;
    plan.input_bytes = input_bytes;
    plan.working_memory_bytes = available_memory_bytes;
    plan.merge_buffer_bytes = transfer;
    if (input_bytes <= available_memory_bytes) {
        plan.mode = SortMode::one_pass;
        plan.run_bytes = std::max<std::uint64_t>(input_bytes, 1);
        plan.estimated_run_count = 1;
        return plan;
    }

    plan.mode = SortMode::two_pass;
    const std::uint64_t ceiling = detail::max_run_bytes(available_memory_bytes, transfer);
    std::uint64_t run = std::min(sqrt_run_bytes(input_bytes, transfer), ceiling);
    while (run <= ceiling && !detail::fan_in_fits(input_bytes, run, transfer, available_memory_bytes))
        run += transfer;
    if (run > ceiling) {
        throw Error(ErrorKind::infeasible,
                    "two-pass infeasible: sorting " + std::to_string(input_bytes) + " bytes with " +
                        std::to_string(transfer) + "-byte transfers needs at least " +
                        std::to_string(detail::min_two_pass_memory(input_bytes, transfer)) +
                        " bytes of memory, have " + std::to_string(available_memory_bytes));
    }
    plan.run_bytes = run;
    plan.estimated_run_count = detail::ceil_div(input_bytes, run);
    return plan;
}

/// Plan for input whose size is unknown up front (a pipe on stdin): runs as
/// large as memory allows, which maximises the fan-in the merge can afford.
/// If the first run swallows the whole input the sort finishes in one pass.
inline SortPlan plan_stream_sort(const SortConfig& config, std::uint64_t available_memory_bytes)
{
    const std::uint64_t transfer = config.transfer_bytes;
    if (available_memory_bytes < 4 * transfer)
        throw usage_error("memory budget " + std::to_string(available_memory_bytes) +
                          " bytes is below the minimum of four transfers (" +
                          std::to_string(4 * transfer) + " bytes)");
    SortPlan plan;
    plan.mode = SortMode::two_pass;
    plan.working_memory_bytes = available_memory_bytes;
    plan.merge_buffer_bytes = transfer;
    plan.run_bytes = detail::max_run_bytes(available_memory_bytes, transfer);
    plan.estimated_run_count = 1;
    return plan;
}

inline std::string SortPlan::description() const
{
    std::ostringstream out;
    out << "mode=" << to_string(mode) << " input_bytes=" << input_bytes
        << " memory_bytes=" << working_memory_bytes;
    if (mode == SortMode::two_pass) {
        out << " run_bytes=" << run_bytes << " runs=" << estimated_run_count
            << " merge_buffer_bytes=" << merge_buffer_bytes
            << " (run size from sqrt(input x transfer); for a 1 GiB input with 256 KiB transfers"
               " this gives 16 MiB, where the original NTsort notes quote about 20 MB)";
    }
    return out.str();
}

/// Memory budget used when /M is absent: a quarter of physical memory,
/// never less than four transfers.
inline std::uint64_t default_memory_bytes(const SortConfig& config)
{
    std::uint64_t physical = 0;
    const long pages = ::sysconf(_SC_PHYS_PAGES);
    const long page_size = ::sysconf(_SC_PAGESIZE);
    if (pages > 0 && page_size > 0)
        physical = static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page_size);
    const std::uint64_t floor = 4 * static_cast<std::uint64_t>(config.transfer_bytes);
    return std::max(floor, physical / 4);
}

inline std::uint64_t memory_budget_bytes(const SortConfig& config)
{
    return config.memory_kilobytes ? *config.memory_kilobytes * 1024 : default_memory_bytes(config);
}

} // namespace pennysort
