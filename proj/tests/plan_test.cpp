#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pennysort/plan.hpp"

namespace pennysort {
namespace {

constexpr std::uint64_t KiB = 1024;
constexpr std::uint64_t MiB = 1024 * KiB;
constexpr std::uint64_t GiB = 1024 * MiB;

SortConfig transfer(std::uint64_t bytes)
{
    SortConfig c;
    c.transfer_bytes = bytes;
    return c;
}

void expect_feasible(const SortPlan& p, std::uint64_t transfer_bytes)
{
    if (p.mode == SortMode::one_pass) {
        EXPECT_LE(p.input_bytes, p.working_memory_bytes);
        return;
    }
    EXPECT_GT(p.input_bytes, p.working_memory_bytes);
    EXPECT_LE(p.run_bytes, p.working_memory_bytes);
    EXPECT_EQ(p.run_bytes % transfer_bytes, 0u);
    const std::uint64_t k = (p.input_bytes + p.run_bytes - 1) / p.run_bytes;
    EXPECT_EQ(p.estimated_run_count, k);
    EXPECT_LE((k + 1) * p.merge_buffer_bytes, p.working_memory_bytes);
}

TEST(PlanSort, OneGibSquareRootRule)
{
    // sqrt(2^30 * 2^18) = 2^24 exactly.
    const auto p = plan_sort(GiB, transfer(256 * KiB), 64 * MiB);
    EXPECT_EQ(p.mode, SortMode::two_pass);
    EXPECT_EQ(p.run_bytes, 16 * MiB);
    EXPECT_EQ(p.estimated_run_count, 64u);
    EXPECT_EQ(p.merge_buffer_bytes, 256 * KiB);
    expect_feasible(p, 256 * KiB);
    EXPECT_NE(p.description().find("20 MB"), std::string::npos);
    EXPECT_NE(p.description().find("16 MiB"), std::string::npos);
}

TEST(PlanSort, FitsInMemoryIsOnePass)
{
    const auto p = plan_sort(10'000'000, transfer(256 * KiB), 64 * MiB);
    EXPECT_EQ(p.mode, SortMode::one_pass);
    EXPECT_EQ(p.working_memory_bytes, 64 * MiB);
    EXPECT_EQ(plan_sort(0, transfer(256 * KiB), 64 * MiB).mode, SortMode::one_pass);
    EXPECT_EQ(plan_sort(64 * MiB, transfer(256 * KiB), 64 * MiB).mode, SortMode::one_pass);
}

TEST(PlanSort, PennySortMachineShape)
{
    // 15M records of 100 bytes on a 64 MB machine.
    const std::uint64_t n = 1'500'000'000;
    const auto p = plan_sort(n, transfer(256 * KiB), 64 * MiB);
    EXPECT_EQ(p.mode, SortMode::two_pass);
    expect_feasible(p, 256 * KiB);
    const double root = std::sqrt(static_cast<double>(n) * 256 * KiB);
    EXPECT_GE(static_cast<double>(p.run_bytes), root);
    EXPECT_LT(static_cast<double>(p.run_bytes), root + 256 * KiB);
}

// With k = ceil(n / r) and r >= sqrt(n * T), k * T <= r, so the square-root
// run either fits with its merge buffers or nothing larger within memory
// does. Feasible plans therefore always use the square-root run size.
TEST(PlanSort, FeasiblePlansUseSquareRootRuns)
{
    std::mt19937_64 rng(4);
    int feasible = 0;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t t = 4 * KiB * (1 + rng() % 8);
        const std::uint64_t n = 8 * t + rng() % (64 * MiB);
        const std::uint64_t m = 4 * t + rng() % (2 * MiB);
        if (m >= n)
            continue;
        const std::uint64_t r = sqrt_run_bytes(n, t);
        const bool fits = r <= m && ((n + r - 1) / r + 1) * t <= m;
        if (fits) {
            ++feasible;
            const auto p = plan_sort(n, transfer(t), m);
            EXPECT_EQ(p.run_bytes, r);
            expect_feasible(p, t);
        } else {
            EXPECT_THROW(plan_sort(n, transfer(t), m), Error) << n << " " << m << " " << t;
        }
    }
    EXPECT_GT(feasible, 100);
}

TEST(PlanSort, InfeasibleNamesMinimumMemory)
{
    try {
        plan_sort(GiB, transfer(256 * KiB), 1 * MiB);
        FAIL() << "expected infeasible";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::infeasible);
        const std::string what = e.what();
        EXPECT_NE(what.find("two-pass infeasible"), std::string::npos);
        EXPECT_NE(what.find("at least"), std::string::npos);
    }
}

TEST(PlanSort, MinimumMemoryIsTight)
{
    const std::uint64_t t = 4 * KiB;
    for (std::uint64_t n : {100 * KiB, 1 * MiB, 7 * MiB + 3}) {
        const std::uint64_t m = detail::min_two_pass_memory(n, t);
        if (m > n)
            continue;
        EXPECT_NO_THROW(plan_sort(n, transfer(t), m));
        if (m - t >= 4 * t && m - t < n) {
            EXPECT_THROW(plan_sort(n, transfer(t), m - t), Error);
        }
    }
}

TEST(PlanSort, RejectsTinyMemory)
{
    EXPECT_THROW(plan_sort(10, transfer(256 * KiB), 256 * KiB), Error);
}

TEST(PlanSort, EveryPlanIsFeasible)
{
    std::mt19937_64 rng(17);
    for (int i = 0; i < 5000; ++i) {
        const std::uint64_t t = 4 * KiB * std::uniform_int_distribution<std::uint64_t>(1, 64)(rng);
        const std::uint64_t m = std::uniform_int_distribution<std::uint64_t>(4 * t, 512 * MiB)(rng);
        const std::uint64_t n = std::uniform_int_distribution<std::uint64_t>(0, 8 * GiB)(rng);
        try {
            expect_feasible(plan_sort(n, transfer(t), m), t);
        } catch (const Error& e) {
            ASSERT_EQ(e.kind(), ErrorKind::infeasible);
            ASSERT_GT(detail::min_two_pass_memory(n, t), m);
        }
    }
}

} // namespace
} // namespace pennysort
