#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "pennysort/recgen.hpp"
#include "pennysort/sort.hpp"
#include "test_util.hpp"

namespace pennysort {
namespace {

using test::read_file;
using test::TempDir;
using test::write_file;

std::string generate_string(const GenSpec& spec)
{
    std::ostringstream out;
    generate(spec, out);
    return out.str();
}

ValidationReport validate_string(const std::string& s, const SortConfig& cfg = {})
{
    std::istringstream in(s);
    return validate(in, cfg);
}

TEST(Generate, EmptySpec)
{
    GenSpec spec;
    spec.seed = 99;
    std::ostringstream out;
    const auto summary = generate(spec, out);
    EXPECT_EQ(summary.records, 0u);
    EXPECT_EQ(summary.bytes, 0u);
    EXPECT_TRUE(out.str().empty());
    EXPECT_EQ(summary.line(), "records=0 bytes=0 seed=99");
}

TEST(Generate, DatamationSizeFile)
{
    TempDir dir;
    GenSpec spec;
    spec.record_count = 1'000'000;
    const auto summary = generate_file(spec, dir / "dm");
    EXPECT_EQ(summary.bytes, 100'000'000u);
    EXPECT_EQ(std::filesystem::file_size(dir / "dm"), 100'000'000u);
}

TEST(Generate, Deterministic)
{
    GenSpec spec;
    spec.record_count = 1000;
    spec.seed = 42;
    EXPECT_EQ(generate_string(spec), generate_string(spec));
    TempDir dir;
    generate_file(spec, dir / "a");
    generate_file(spec, dir / "b", {4096, true, 1});
    EXPECT_EQ(read_file(dir / "a"), read_file(dir / "b"));
    EXPECT_EQ(read_file(dir / "a"), generate_string(spec));
    spec.seed = 43;
    EXPECT_NE(read_file(dir / "a"), generate_string(spec));
}

// Frozen from an independent re-implementation of the record format.
TEST(Generate, GoldenRecords)
{
    GenSpec spec;
    spec.record_count = 1000;
    spec.seed = 42;
    const auto data = generate_string(spec);
    ASSERT_EQ(data.size(), 100'000u);
    const std::string dots(68, '.');
    EXPECT_EQ(data.substr(0, 100), "f/:@#r4l@Z00000000000000000000" + dots + "\r\n");
    EXPECT_EQ(data.substr(100, 100), "3NPQ_3)O(a00000000000000000001" + dots + "\r\n");
    EXPECT_EQ(validate_string(data).key_checksum, 0xc71c84fa33198c8bULL);
}

TEST(Generate, LayoutForOddSizes)
{
    GenSpec spec;
    spec.record_count = 12;
    spec.record_bytes = 16;
    spec.key_bytes = 4;
    const auto data = generate_string(spec);
    ASSERT_EQ(data.size(), 12u * 16);
    // 10 payload bytes: the ordinal fills them all.
    EXPECT_EQ(data.substr(16 * 11 + 4, 12), "0000000011\r\n");

    spec.record_bytes = 12;
    spec.key_bytes = 10;  // no payload
    const auto bare = generate_string(spec);
    EXPECT_EQ(bare.substr(10, 2), "\r\n");
}

TEST(Generate, RejectsBadSpecs)
{
    GenSpec spec;
    spec.record_bytes = 11;
    spec.key_bytes = 10;
    std::ostringstream out;
    EXPECT_THROW(generate(spec, out), Error);
    spec.record_bytes = 70000;
    EXPECT_THROW(generate(spec, out), Error);
}

TEST(Generate, SinkFailureIsIoError)
{
    GenSpec spec;
    spec.record_count = 10;
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    try {
        generate(spec, out);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::io);
        EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos);
    }
}

TEST(Generate, KeysArePrintableAndRecordsUnique)
{
    GenSpec spec;
    spec.record_count = 5000;
    spec.seed = 7;
    const auto data = generate_string(spec);
    std::set<std::string> seen;
    for (std::size_t r = 0; r < spec.record_count; ++r) {
        const auto rec = data.substr(r * 100, 100);
        for (std::size_t i = 0; i < 10; ++i) {
            ASSERT_GE(static_cast<unsigned char>(rec[i]), 0x20);
            ASSERT_LE(static_cast<unsigned char>(rec[i]), 0x7e);
        }
        ASSERT_TRUE(seen.insert(rec).second);
    }
}

TEST(Generate, FirstKeyByteChiSquare)
{
    GenSpec spec;
    spec.record_count = 200'000;
    spec.seed = 2024;
    const auto data = generate_string(spec);
    std::array<double, 95> counts{};
    for (std::size_t r = 0; r < spec.record_count; ++r)
        counts[static_cast<unsigned char>(data[r * 100]) - 0x20] += 1;
    const double expected = static_cast<double>(spec.record_count) / 95;
    double chi2 = 0;
    for (double c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    // Upper 0.001 quantile of chi-square with 94 degrees of freedom.
    EXPECT_LT(chi2, 142.119);
}

TEST(Validate, SortedThreeLines)
{
    const auto r = validate_string("a\r\nb\r\nc\r\n");
    EXPECT_TRUE(r.is_sorted);
    EXPECT_EQ(r.record_count, 3u);
    EXPECT_FALSE(r.first_violation_index);
    EXPECT_EQ(r.total_bytes, 9u);
    EXPECT_EQ(r.key_checksum, 0x0292d41937ccd672ULL);
}

TEST(Validate, FirstViolation)
{
    const auto r = validate_string("b\r\na\r\n");
    EXPECT_FALSE(r.is_sorted);
    ASSERT_TRUE(r.first_violation_index);
    EXPECT_EQ(*r.first_violation_index, 1u);
    const auto later = validate_string("a\nb\nc\nB\nd\nA\n");
    EXPECT_EQ(*later.first_violation_index, 3u);
}

TEST(Validate, RespectsReverseAndOffset)
{
    SortConfig cfg;
    cfg.reverse = true;
    EXPECT_TRUE(validate_string("c\nb\na\n", cfg).is_sorted);
    cfg = {};
    cfg.key_offset_n = 2;
    EXPECT_TRUE(validate_string("za\nab\nyc\n", cfg).is_sorted);
    EXPECT_TRUE(validate_string("", cfg).is_sorted);
}

TEST(Validate, OversizeRecordIsFormatError)
{
    SortConfig cfg;
    cfg.record_max = 5;
    EXPECT_NO_THROW(validate_string("12345\r\n", cfg));
    try {
        validate_string("ok\n123456\n", cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::format);
        EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos);
    }
}

TEST(Validate, ChecksumIsPermutationInvariant)
{
    GenSpec spec;
    spec.record_count = 500;
    spec.seed = 5;
    const auto data = generate_string(spec);
    std::vector<std::string> recs;
    for (std::size_t i = 0; i < data.size(); i += 100)
        recs.push_back(data.substr(i, 100));
    std::mt19937_64 rng(1);
    const auto base = validate_string(data).key_checksum;
    for (int i = 0; i < 20; ++i) {
        std::shuffle(recs.begin(), recs.end(), rng);
        std::string shuffled;
        for (const auto& r : recs)
            shuffled += r;
        ASSERT_EQ(validate_string(shuffled).key_checksum, base);
    }
    // A single flipped byte changes it.
    std::string changed = data;
    changed[50] ^= 1;
    EXPECT_NE(validate_string(changed).key_checksum, base);
}

// Brute force: hash every record of the small file directly and sum.
TEST(Validate, RoundTripThroughSortPreservesChecksum)
{
    TempDir dir;
    GenSpec spec;
    spec.record_count = 3000;
    spec.seed = 77;
    generate_file(spec, dir / "in");
    const auto data = read_file(dir / "in");
    std::uint64_t brute = 0;
    for (std::size_t i = 0; i < data.size(); i += 100)
        brute += record_hash(std::string_view(data).substr(i, 100));

    for (bool reverse : {false, true}) {
        SortConfig cfg;
        cfg.input = dir / "in";
        cfg.output = dir / "out";
        cfg.temp_dir = dir.path();
        cfg.reverse = reverse;
        cfg.key_offset_n = reverse ? 4 : 1;
        cfg.transfer_bytes = 4096;
        cfg.memory_kilobytes = 64;  // forces two passes over 300 KB
        const auto summary = sort(cfg);
        EXPECT_EQ(summary.plan.mode, SortMode::two_pass);
        const auto before = validate_file(dir / "in", cfg);
        const auto after = validate_file(dir / "out", cfg);
        EXPECT_EQ(before.key_checksum, brute);
        EXPECT_EQ(after.key_checksum, brute);
        EXPECT_TRUE(after.is_sorted);
        EXPECT_EQ(after.record_count, 3000u);
    }
}

} // namespace
} // namespace pennysort
