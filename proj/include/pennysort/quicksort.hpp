#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <iterator>
#include <utility>

namespace pennysort {

inline constexpr std::ptrdiff_t kInsertionSortThreshold = 16;

namespace detail {

template <typename It, typename Less>
void insertion_sort(It first, It last, Less& less)
{
    if (first == last)
        return;
    for (It i = std::next(first); i != last; ++i) {
        auto value = std::move(*i);
        It j = i;
        for (; j != first && less(value, *std::prev(j)); --j)
            *j = std::move(*std::prev(j));
        *j = std::move(value);
    }
}

// Orders *a <= *b <= *c and returns b.
template <typename It, typename Less>
It median_of_three(It a, It b, It c, Less& less)
{
    if (less(*b, *a))
        std::iter_swap(a, b);
    if (less(*c, *b)) {
        std::iter_swap(b, c);
        if (less(*b, *a))
            std::iter_swap(a, b);
    }
    return b;
}

template <typename It, typename Less>
void quicksort_loop(It first, It last, int depth_budget, Less& less)
{
    while (last - first > kInsertionSortThreshold) {
        if (depth_budget-- == 0) {
            std::make_heap(first, last, less);
            std::sort_heap(first, last, less);
            return;
        }
        It mid = first + (last - first) / 2;
        median_of_three(first, mid, std::prev(last), less);
        // After the median step *first <= pivot <= *(last-1) act as sentinels.
        std::iter_swap(mid, std::prev(last, 2));
        It pivot = std::prev(last, 2);
        It lo = first;
        It hi = pivot;
        for (;;) {
            while (less(*++lo, *pivot)) {
            }
            while (less(*pivot, *--hi)) {
            }
            if (!(lo < hi))
                break;
            std::iter_swap(lo, hi);
        }
        std::iter_swap(lo, pivot);
        // Recurse into the smaller side, iterate on the larger one.
        if (lo - first < last - lo) {
            quicksort_loop(first, lo, depth_budget, less);
            first = std::next(lo);
        } else {
            quicksort_loop(std::next(lo), last, depth_budget, less);
            last = lo;
        }
    }
    insertion_sort(first, last, less);
}

} // namespace detail

/// In-place quicksort: median-of-three pivot, insertion sort for ranges of
/// 16 or fewer elements, heapsort once recursion depth exceeds 2*log2(n).
/// Not stable; callers that need a deterministic result supply a strict total
/// order.
template <typename It, typename Less>
void quicksort(It first, It last, Less less)
{
    const auto n = static_cast<std::size_t>(last - first);
    if (n < 2)
        return;
    const int depth = 2 * static_cast<int>(std::bit_width(n) - 1);
    detail::quicksort_loop(first, last, depth, less);
}

} // namespace pennysort
