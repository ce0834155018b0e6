#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pennysort/error.hpp"

namespace pennysort {

enum class Locale { c };

inline constexpr std::size_t kDefaultRecordMax = 4096;
inline constexpr std::size_t kRecordMaxLimit = 65535;
inline constexpr std::size_t kDefaultTransferBytes = 262144;
inline constexpr std::size_t kPageBytes = 4096;

// Everything the `sort` verb accepts on its command line, plus the IO knobs.
struct SortConfig
{
    std::size_t key_offset_n = 1;  // /+n, 1-based column where comparison starts
    bool reverse = false;          // /R
    Locale locale = Locale::c;     // /L
    std::size_t record_max = kDefaultRecordMax;  // /REC
    std::optional<std::uint64_t> memory_kilobytes;  // /M, planner default when absent
    std::filesystem::path temp_dir;                 // /T, system temp dir when empty
    std::optional<std::filesystem::path> input;     // stdin when absent
    std::optional<std::filesystem::path> output;    // /O, stdout when absent
    bool overlap_io = true;
    bool direct_io = true;
    std::size_t transfer_bytes = kDefaultTransferBytes;

    void check() const
    {
        if (key_offset_n < 1)
            throw usage_error("key offset /+n must be at least 1");
        if (record_max < 1 || record_max > kRecordMaxLimit)
            throw usage_error("record maximum must be in [1, 65535], got " +
                              std::to_string(record_max));
        if (transfer_bytes == 0 || transfer_bytes % kPageBytes != 0)
            throw usage_error("transfer size must be a positive multiple of 4096, got " +
                              std::to_string(transfer_bytes));
        if (memory_kilobytes && *memory_kilobytes == 0)
            throw usage_error("memory budget /M must be positive");
    }

    friend bool operator==(const SortConfig&, const SortConfig&) = default;
};

namespace detail {

inline constexpr std::array<unsigned char, 256> kFoldTable = [] {
    std::array<unsigned char, 256> t{};
    for (int i = 0; i < 256; ++i)
        t[i] = static_cast<unsigned char>(i >= 'A' && i <= 'Z' ? i + ('a' - 'A') : i);
    return t;
}();

inline std::string_view key_suffix(std::string_view line, std::size_t n)
{
    return line.size() < n ? std::string_view{} : line.substr(n - 1);
}

inline std::strong_ordering compare_raw(std::string_view a, std::string_view b)
{
    const int c = a.compare(b);  // char_traits<char> compares as unsigned char
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

inline std::strong_ordering compare_folded(std::string_view a, std::string_view b)
{
    const std::size_t len = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < len; ++i) {
        const auto ca = kFoldTable[static_cast<unsigned char>(a[i])];
        const auto cb = kFoldTable[static_cast<unsigned char>(b[i])];
        if (ca != cb)
            return ca <=> cb;
    }
    return a.size() <=> b.size();
}

inline std::weak_ordering invert(std::weak_ordering o)
{
    return 0 <=> o;
}

} // namespace detail

/// Collates two lines (terminators excluded) the way the `sort` verb does.
///
/// Comparison starts at character `key_offset_n` (1-based). A line with fewer
/// characters than that has an empty key and collates before any non-empty
/// key. Keys are compared case-insensitively (ASCII A-Z only, C collation),
/// then byte-wise on the unfolded keys. `reverse` inverts the result.
inline std::weak_ordering compare_lines(std::string_view a, std::string_view b,
                                        const SortConfig& config)
{
    const auto ka = detail::key_suffix(a, config.key_offset_n);
    const auto kb = detail::key_suffix(b, config.key_offset_n);
    std::weak_ordering order = detail::compare_folded(ka, kb);
    if (order == 0)
        order = detail::compare_raw(ka, kb);
    return config.reverse ? detail::invert(order) : order;
}

/// Strict total order used to place records in the output.
///
/// Refines compare_lines with the full unfolded content and then the
/// terminator bytes, so two records compare equal only when they are
/// byte-identical. This is what makes one-pass and two-pass output identical.
inline std::strong_ordering record_order(std::string_view a_content, std::string_view a_term,
                                         std::string_view b_content, std::string_view b_term,
                                         const SortConfig& config)
{
    const auto ka = detail::key_suffix(a_content, config.key_offset_n);
    const auto kb = detail::key_suffix(b_content, config.key_offset_n);
    std::strong_ordering order = detail::compare_folded(ka, kb);
    if (order == 0)
        order = detail::compare_raw(ka, kb);
    if (order == 0)
        order = detail::compare_raw(a_content, b_content);
    if (order == 0)
        order = detail::compare_raw(a_term, b_term);
    return config.reverse ? 0 <=> order : order;
}

} // namespace pennysort
