#pragma once

#include <bit>
#include <cstddef>
#include <vector>

namespace pennysort {

/// Tournament tree of losers over k sources.
///
/// `Before(i, j)` must say whether source i's current element goes out ahead
/// of source j's, treating exhausted sources as +infinity and breaking ties by
/// source index. Each internal node keeps the loser of its match, so replaying
/// after the winner advances costs ceil(log2 k) comparisons.
template <typename Before>
class LoserTree
{
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    LoserTree(std::size_t k, Before before) : k_(k), before_(std::move(before))
    {
        leaves_ = k_ <= 1 ? 1 : std::bit_ceil(k_);
        losers_.assign(leaves_, npos);
        winner_ = k_ == 0 ? npos : build(1);
    }

    // Source whose element goes next; npos when k == 0.
    std::size_t top() const noexcept { return winner_; }

    // Call after the winning source has advanced to its next element.
    void replay()
    {
        std::size_t current = winner_;
        for (std::size_t node = (current + leaves_) / 2; node >= 1; node /= 2) {
            if (beats(losers_[node], current))
                std::swap(losers_[node], current);
        }
        winner_ = current;
    }

    std::size_t size() const noexcept { return k_; }

private:
    // Virtual padding leaves (index >= k) never win.
    bool beats(std::size_t a, std::size_t b)
    {
        if (a == npos || a >= k_)
            return false;
        if (b == npos || b >= k_)
            return true;
        return before_(a, b);
    }

    std::size_t build(std::size_t node)
    {
        if (node >= leaves_)
            return node - leaves_;
        const std::size_t left = build(2 * node);
        const std::size_t right = build(2 * node + 1);
        if (beats(right, left)) {
            losers_[node] = left;
            return right;
        }
        losers_[node] = right;
        return left;
    }

    std::size_t k_;
    Before before_;
    std::size_t leaves_ = 1;
    std::vector<std::size_t> losers_;
    std::size_t winner_ = npos;
};

} // namespace pennysort
