#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "pennysort/compare.hpp"
#include "test_util.hpp"

namespace pennysort {
namespace {

int as_int(std::weak_ordering o) { return o < 0 ? -1 : o > 0 ? 1 : 0; }

SortConfig with(std::size_t n, bool reverse)
{
    SortConfig c;
    c.key_offset_n = n;
    c.reverse = reverse;
    return c;
}

TEST(CompareLines, SingleCharacters)
{
    EXPECT_LT(as_int(compare_lines("a", "b", with(1, false))), 0);
    EXPECT_GT(as_int(compare_lines("a", "b", with(1, true))), 0);
}

TEST(CompareLines, FoldEqualBreaksTieOnRawBytes)
{
    EXPECT_LT(as_int(compare_lines("Apple", "apple", with(1, false))), 0);
    EXPECT_GT(as_int(compare_lines("apple", "Apple", with(1, false))), 0);
    // Folding puts 'B' after 'a' even though 0x42 < 0x61.
    EXPECT_LT(as_int(compare_lines("apple", "Banana", with(1, false))), 0);
}

TEST(CompareLines, ShorterThanOffsetCollatesFirst)
{
    EXPECT_LT(as_int(compare_lines("xy", "xyz", with(3, false))), 0);
    EXPECT_GT(as_int(compare_lines("xyz", "xy", with(3, false))), 0);
    // Both keys empty.
    EXPECT_EQ(as_int(compare_lines("ab", "z", with(3, false))), 0);
    EXPECT_EQ(as_int(compare_lines("", "", with(1, false))), 0);
}

TEST(CompareLines, OffsetSkipsPrefix)
{
    EXPECT_LT(as_int(compare_lines("zzA", "aaB", with(3, false))), 0);
    EXPECT_GT(as_int(compare_lines("12abc", "99ABC", with(3, false))), 0);
}

TEST(CompareLines, ReverseSortsZToAThenNineToZero)
{
    const auto cfg = with(1, true);
    EXPECT_LT(as_int(compare_lines("Z", "A", cfg)), 0);
    EXPECT_LT(as_int(compare_lines("9", "0", cfg)), 0);
    EXPECT_LT(as_int(compare_lines("a", "9", cfg)), 0);
}

TEST(CompareLines, HighBytesCompareUnsigned)
{
    EXPECT_GT(as_int(compare_lines("\xe9", "z", with(1, false))), 0);
}

// Every pair of strings of length <= 2 over an alphabet that exercises
// folding, against the materialised-string oracle.
TEST(CompareLines, MatchesOracleExhaustively)
{
    const std::string alphabet = "AaBb ~\x7f";
    std::vector<std::string> words{""};
    for (char c : alphabet)
        words.emplace_back(1, c);
    for (char c : alphabet)
        for (char d : alphabet)
            words.push_back(std::string{c, d});
    for (std::size_t n = 1; n <= 3; ++n)
        for (bool rev : {false, true})
            for (const auto& a : words)
                for (const auto& b : words)
                    ASSERT_EQ(as_int(compare_lines(a, b, with(n, rev))), test::oracle_compare(a, b, n, rev))
                        << "a='" << a << "' b='" << b << "' n=" << n << " rev=" << rev;
}

TEST(CompareLines, OrderingLaws)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(0, 6);
    std::uniform_int_distribution<int> ch(0, 5);
    const std::string alphabet = "aAbB0 ";
    auto word = [&] {
        std::string s;
        for (int i = len(rng); i > 0; --i)
            s += alphabet[ch(rng)];
        return s;
    };
    for (int iter = 0; iter < 20000; ++iter) {
        const std::string a = word(), b = word(), c = word();
        const std::size_t n = 1 + iter % 4;
        const auto fwd = with(n, false);
        const auto rev = with(n, true);
        const int ab = as_int(compare_lines(a, b, fwd));
        // Antisymmetry.
        ASSERT_EQ(ab, -as_int(compare_lines(b, a, fwd)));
        // Reverse inverts less/greater and keeps equal.
        ASSERT_EQ(as_int(compare_lines(a, b, rev)), -ab);
        // Transitivity.
        const int bc = as_int(compare_lines(b, c, fwd));
        if (ab <= 0 && bc <= 0) {
            ASSERT_LE(as_int(compare_lines(a, c, fwd)), 0) << a << " " << b << " " << c;
        }
    }
}

TEST(RecordOrder, OnlyIdenticalRecordsTie)
{
    const auto cfg = with(3, false);
    // Equal keys (both shorter than n), different prefixes.
    EXPECT_NE(as_int(record_order("ab", "\n", "cd", "\n", cfg)), 0);
    EXPECT_LT(as_int(record_order("ab", "\n", "cd", "\n", cfg)), 0);
    // Same content, different terminators.
    EXPECT_LT(as_int(record_order("x", "\n", "x", "\r\n", cfg)), 0);
    EXPECT_EQ(as_int(record_order("x", "\r\n", "x", "\r\n", cfg)), 0);
    // Reverse flips the whole order.
    EXPECT_GT(as_int(record_order("ab", "\n", "cd", "\n", with(3, true))), 0);
}

TEST(SortConfig, RejectsBadValues)
{
    SortConfig c;
    c.record_max = 65536;
    EXPECT_THROW(c.check(), Error);
    c = {};
    c.key_offset_n = 0;
    EXPECT_THROW(c.check(), Error);
    c = {};
    c.transfer_bytes = 5000;
    EXPECT_THROW(c.check(), Error);
    c = {};
    EXPECT_NO_THROW(c.check());
}

} // namespace
} // namespace pennysort
