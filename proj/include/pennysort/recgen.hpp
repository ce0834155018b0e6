#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pennysort/block_io.hpp"
#include "pennysort/compare.hpp"
#include "pennysort/error.hpp"
#include "pennysort/line.hpp"

namespace pennysort {

// Benchmark record layout (defaults are the Datamation shape):
//
//   [0, key_bytes)                    key, uniform printable ASCII 0x20..0x7E
//   [key_bytes, record_bytes - 2)     zero-padded decimal ordinal (at most 20
//                                     digits), then '.' filler
//   [record_bytes - 2, record_bytes)  "\r\n"
struct GenSpec
{
    std::uint64_t record_count = 0;
    std::uint64_t seed = 0;
    std::size_t record_bytes = 100;
    std::size_t key_bytes = 10;
    static constexpr std::size_t terminator_bytes = 2;

    void check() const
    {
        if (key_bytes + terminator_bytes > record_bytes)
            throw usage_error("key_bytes + 2 must not exceed record_bytes");
        if (record_bytes > kRecordMaxLimit)
            throw usage_error("record_bytes must not exceed 65535");
    }
};

inline constexpr char kFillerChar = '.';
inline constexpr std::size_t kMaxOrdinalDigits = 20;

/// SplitMix64 (Steele, Lea, Flood). Fixed so generated files are
/// reproducible across platforms and standard libraries.
class SplitMix64
{
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) by multiply-shift; bias is below bound / 2^64.
    std::uint32_t below(std::uint32_t bound)
    {
        return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

private:
    std::uint64_t state_;
};

/// Fills `out` (exactly record_bytes long) with record number `ordinal`.
/// Keys consume one PRNG draw per byte.
inline void make_record(const GenSpec& spec, std::uint64_t ordinal, SplitMix64& rng, std::span<char> out)
{
    for (std::size_t i = 0; i < spec.key_bytes; ++i)
        out[i] = static_cast<char>(0x20 + rng.below(95));
    const std::size_t payload = spec.record_bytes - spec.key_bytes - GenSpec::terminator_bytes;
    const std::size_t digits = std::min(payload, kMaxOrdinalDigits);
    std::uint64_t v = ordinal;
    for (std::size_t i = digits; i > 0; --i) {
        out[spec.key_bytes + i - 1] = static_cast<char>('0' + v % 10);
        v /= 10;
    }
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(spec.key_bytes + digits),
              out.end() - GenSpec::terminator_bytes, kFillerChar);
    out[spec.record_bytes - 2] = '\r';
    out[spec.record_bytes - 1] = '\n';
}

struct GenSummary
{
    std::uint64_t records = 0;
    std::uint64_t bytes = 0;
    std::uint64_t seed = 0;

    std::string line() const
    {
        return "records=" + std::to_string(records) + " bytes=" + std::to_string(bytes) +
               " seed=" + std::to_string(seed);
    }
};

/// Writes the records of `spec` to any sink with a write(string_view) member.
template <typename Sink>
GenSummary generate_to(const GenSpec& spec, Sink&& sink)
{
    spec.check();
    SplitMix64 rng(spec.seed);
    constexpr std::size_t kBatch = 1 << 16;
    const std::size_t per_batch = std::max<std::size_t>(1, kBatch / std::max<std::size_t>(spec.record_bytes, 1));
    std::vector<char> batch(per_batch * spec.record_bytes);
    GenSummary summary{0, 0, spec.seed};
    while (summary.records < spec.record_count) {
        const std::size_t n = static_cast<std::size_t>(
            std::min<std::uint64_t>(per_batch, spec.record_count - summary.records));
        for (std::size_t i = 0; i < n; ++i)
            make_record(spec, summary.records + i, rng,
                        std::span<char>(batch.data() + i * spec.record_bytes, spec.record_bytes));
        sink.write(std::string_view(batch.data(), n * spec.record_bytes));
        summary.records += n;
        summary.bytes += n * spec.record_bytes;
    }
    return summary;
}

inline GenSummary generate(const GenSpec& spec, std::ostream& sink)
{
    struct OstreamSink
    {
        std::ostream& out;
        std::uint64_t offset = 0;
        void write(std::string_view bytes)
        {
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out)
                throw io_error("write failed at byte offset " + std::to_string(offset));
            offset += bytes.size();
        }
    };
    return generate_to(spec, OstreamSink{sink});
}

inline GenSummary generate_file(const GenSpec& spec, const std::filesystem::path& path,
                                BlockStreamConfig cfg = {})
{
    spec.check();
    BlockWriter writer(path, cfg);
    const auto summary = generate_to(spec, writer);
    writer.close();
    return summary;
}

/// 64-bit hash of one whole record (content and terminator): FNV-1a followed
/// by the SplitMix64 finalizer.
inline std::uint64_t record_hash(std::string_view record)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : record) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    return h ^ (h >> 31);
}

struct ValidationReport
{
    std::uint64_t record_count = 0;
    bool is_sorted = true;
    std::optional<std::uint64_t> first_violation_index;
    std::uint64_t key_checksum = 0;  // wrap-around sum of record_hash
    std::uint64_t total_bytes = 0;

    std::string line() const
    {
        char checksum[19];
        std::snprintf(checksum, sizeof checksum, "%016llx", static_cast<unsigned long long>(key_checksum));
        std::string s = "records=" + std::to_string(record_count) +
                        " sorted=" + (is_sorted ? "true" : "false");
        if (first_violation_index)
            s += " first_violation=" + std::to_string(*first_violation_index);
        s += " checksum=" + std::string(checksum) + " bytes=" + std::to_string(total_bytes);
        return s;
    }
};

/// Checks order and accumulates the permutation checksum one record at a time.
class Validator
{
public:
    explicit Validator(const SortConfig& config) : config_(config) {}

    void add(const Line& line)
    {
        const auto content = line.content();
        if (report_.record_count > 0 && report_.is_sorted &&
            compare_lines(previous_, content, config_) > 0) {
            report_.is_sorted = false;
            report_.first_violation_index = report_.record_count;
        }
        previous_.assign(content);
        report_.key_checksum += record_hash(line.bytes);
        report_.total_bytes += line.bytes.size();
        report_.record_count += 1;
    }

    const ValidationReport& report() const noexcept { return report_; }

private:
    SortConfig config_;
    std::string previous_;
    ValidationReport report_;
};

template <BlockSource Source>
ValidationReport validate_source(Source& source, const SortConfig& config)
{
    LineAssembler lines(source, config.record_max);
    Validator validator(config);
    while (auto line = lines.next())
        validator.add(*line);
    return validator.report();
}

/// Validates a byte stream of CR-LF or LF terminated lines.
inline ValidationReport validate(std::istream& data, const SortConfig& config)
{
    struct IstreamSource
    {
        std::istream& in;
        std::vector<char> buffer = std::vector<char>(1 << 16);
        std::span<const char> next_block()
        {
            in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            if (in.bad())
                throw io_error("read failed while validating");
            return {buffer.data(), static_cast<std::size_t>(in.gcount())};
        }
    };
    IstreamSource source{data};
    return validate_source(source, config);
}

inline ValidationReport validate_file(const std::filesystem::path& path, const SortConfig& config,
                                      BlockStreamConfig cfg = {})
{
    BlockReader reader(path, cfg);
    return validate_source(reader, config);
}

} // namespace pennysort
