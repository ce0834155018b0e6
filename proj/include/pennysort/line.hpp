#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pennysort/error.hpp"

namespace pennysort {

// One input record: content plus its original terminator ("\r\n", "\n", or
// nothing for an unterminated last line).
struct Line
{
    std::string_view bytes;
    std::size_t terminator_bytes = 0;

    std::string_view content() const { return bytes.substr(0, bytes.size() - terminator_bytes); }
    std::string_view terminator() const { return bytes.substr(bytes.size() - terminator_bytes); }
};

inline std::size_t terminator_length(std::string_view line_with_lf)
{
    if (line_with_lf.empty() || line_with_lf.back() != '\n')
        return 0;
    return line_with_lf.size() >= 2 && line_with_lf[line_with_lf.size() - 2] == '\r' ? 2 : 1;
}

template <typename S>
concept BlockSource = requires(S s) {
    { s.next_block() } -> std::convertible_to<std::span<const char>>;
};

/// Splits a stream of blocks into LF-terminated lines.
///
/// The returned Line views stay valid until the next call to next(). Lines
/// that straddle block boundaries are assembled in an internal carry buffer.
template <BlockSource Source>
class LineAssembler
{
public:
    LineAssembler(Source& source, std::size_t record_max)
        : source_(source), record_max_(record_max) {}

    std::optional<Line> next()
    {
        carry_.clear();
        for (;;) {
            if (pos_ == block_.size()) {
                if (eof_ || !refill()) {
                    eof_ = true;
                    if (carry_.empty())
                        return std::nullopt;
                    return emit(std::string_view(carry_));
                }
            }
            const char* begin = block_.data() + pos_;
            const std::size_t avail = block_.size() - pos_;
            const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', avail));
            if (nl != nullptr) {
                const std::size_t len = static_cast<std::size_t>(nl - begin) + 1;
                pos_ += len;
                if (carry_.empty())
                    return emit(std::string_view(begin, len));
                carry_.append(begin, len);
                return emit(std::string_view(carry_));
            }
            carry_.append(begin, avail);
            pos_ = block_.size();
            // "+ 2" leaves room for a CR LF that has not arrived yet.
            if (carry_.size() > record_max_ + 2)
                throw oversize(carry_.size());
        }
    }

    // Index the next returned record will have.
    std::uint64_t record_index() const noexcept { return index_; }

private:
    bool refill()
    {
        block_ = source_.next_block();
        pos_ = 0;
        return !block_.empty();
    }

    Line emit(std::string_view bytes)
    {
        Line line{bytes, terminator_length(bytes)};
        if (line.content().size() > record_max_)
            throw oversize(line.content().size());
        ++index_;
        return line;
    }

    Error oversize(std::size_t length) const
    {
        return format_error("record " + std::to_string(index_) + " is longer than the record maximum (" +
                            std::to_string(length) + " > " + std::to_string(record_max_) + " characters)");
    }

    Source& source_;
    std::size_t record_max_;
    std::span<const char> block_;
    std::size_t pos_ = 0;
    bool eof_ = false;
    std::uint64_t index_ = 0;
    std::string carry_;
};

} // namespace pennysort
