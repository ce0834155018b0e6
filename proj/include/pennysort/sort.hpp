#pragma once

#include <sys/stat.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pennysort/block_io.hpp"
#include "pennysort/compare.hpp"
#include "pennysort/error.hpp"
#include "pennysort/line.hpp"
#include "pennysort/loser_tree.hpp"
#include "pennysort/plan.hpp"
#include "pennysort/quicksort.hpp"

namespace pennysort {

struct RunDescriptor
{
    std::size_t run_index = 0;
    std::uint64_t offset = 0;  // within the temporary run file
    std::uint64_t byte_length = 0;
    std::uint64_t record_count = 0;
};

inline BlockStreamConfig stream_config(const SortConfig& config)
{
    return {config.transfer_bytes, config.direct_io, config.overlap_io ? std::size_t{2} : std::size_t{1}};
}

/// Records held in memory for one run (or the whole input in a one-pass sort).
class RecordArena
{
public:
    void reserve(std::uint64_t bytes) { bytes_.reserve(static_cast<std::size_t>(bytes)); }

    void add(const Line& line)
    {
        refs_.push_back({static_cast<std::uint64_t>(bytes_.size()), static_cast<std::uint32_t>(line.bytes.size()),
                         static_cast<std::uint8_t>(line.terminator_bytes)});
        bytes_.insert(bytes_.end(), line.bytes.begin(), line.bytes.end());
    }

    // Appends "\n" to a last line that had no terminator.
    void terminate_last()
    {
        if (refs_.empty() || refs_.back().terminator != 0)
            return;
        bytes_.push_back('\n');
        refs_.back().length += 1;
        refs_.back().terminator = 1;
    }

    void sort(const SortConfig& config)
    {
        const char* base = bytes_.data();
        quicksort(refs_.begin(), refs_.end(), [base, &config](const Ref& a, const Ref& b) {
            return record_order(content(base, a), terminator(base, a), content(base, b), terminator(base, b),
                                config) < 0;
        });
    }

    template <typename Sink>
    void write_to(Sink& sink) const
    {
        for (const Ref& r : refs_)
            sink.write(std::string_view(bytes_.data() + r.offset, r.length));
    }

    std::uint64_t bytes() const noexcept { return bytes_.size(); }
    std::uint64_t records() const noexcept { return refs_.size(); }
    bool empty() const noexcept { return refs_.empty(); }

    void clear()
    {
        bytes_.clear();
        refs_.clear();
    }

private:
    struct Ref
    {
        std::uint64_t offset;
        std::uint32_t length;
        std::uint8_t terminator;
    };

    static std::string_view content(const char* base, const Ref& r)
    {
        return {base + r.offset, r.length - r.terminator};
    }
    static std::string_view terminator(const char* base, const Ref& r)
    {
        return {base + r.offset + r.length - r.terminator, r.terminator};
    }

    std::vector<char> bytes_;
    std::vector<Ref> refs_;
};

/// Pulls lines into a RecordArena one chunk at a time. A line that does not
/// fit is held back and starts the next chunk; an oversized line gets a chunk
/// of its own.
template <BlockSource Source>
class ChunkReader
{
public:
    explicit ChunkReader(LineAssembler<Source>& lines) : lines_(lines) {}

    // Fills `arena` up to `limit` bytes. Returns true once the input is exhausted.
    bool fill(RecordArena& arena, std::uint64_t limit)
    {
        if (has_pending_) {
            arena.add(pending_);
            has_pending_ = false;
        }
        while (auto line = lines_.next()) {
            if (!arena.empty() && arena.bytes() + line->bytes.size() > limit) {
                pending_ = *line;
                has_pending_ = true;
                return false;
            }
            arena.add(*line);
        }
        arena.terminate_last();
        exhausted_ = true;
        return true;
    }

    bool exhausted() const noexcept { return exhausted_; }

private:
    LineAssembler<Source>& lines_;
    Line pending_;
    bool has_pending_ = false;
    bool exhausted_ = false;
};

/// Single temporary file holding all runs back to back, removed on destruction.
class TempRunStore
{
public:
    TempRunStore(std::filesystem::path path, BlockStreamConfig cfg)
        : path_(std::move(path)), cfg_(cfg), writer_(std::make_unique<BlockWriter>(path_, cfg_)) {}

    TempRunStore(const TempRunStore&) = delete;
    TempRunStore& operator=(const TempRunStore&) = delete;

    ~TempRunStore()
    {
        writer_.reset();
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }

    RunDescriptor append(const RecordArena& arena)
    {
        RunDescriptor run;
        run.run_index = runs_;
        try {
            writer_->align();
            run.offset = writer_->position();
            arena.write_to(*writer_);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::io)
                throw;
            throw io_error("writing run " + std::to_string(run.run_index) + ": " + e.what());
        }
        run.byte_length = arena.bytes();
        run.record_count = arena.records();
        ++runs_;
        return run;
    }

    void finish()
    {
        if (finished_)
            return;
        finished_ = true;
        try {
            writer_->close();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::io)
                throw;
            throw io_error("writing run " + std::to_string(runs_ == 0 ? 0 : runs_ - 1) + ": " + e.what());
        }
        write_counters_ = writer_->counters();
    }

    const std::filesystem::path& path() const noexcept { return path_; }
    const BlockStreamConfig& config() const noexcept { return cfg_; }
    const IoCounters& write_counters() const noexcept { return write_counters_; }

private:
    std::filesystem::path path_;
    BlockStreamConfig cfg_;
    std::unique_ptr<BlockWriter> writer_;
    std::size_t runs_ = 0;
    bool finished_ = false;
    IoCounters write_counters_;
};

/// Pass one: cuts the input into chunks of at most plan.run_bytes, quicksorts
/// each in memory and appends it to the run store.
template <BlockSource Source>
std::vector<RunDescriptor> form_runs(LineAssembler<Source>& input, const SortPlan& plan,
                                     const SortConfig& config, TempRunStore& temp)
{
    ChunkReader<Source> chunks(input);
    RecordArena arena;
    arena.reserve(plan.run_bytes);
    std::vector<RunDescriptor> runs;
    for (;;) {
        const bool exhausted = chunks.fill(arena, plan.run_bytes);
        if (!arena.empty()) {
            arena.sort(config);
            runs.push_back(temp.append(arena));
            arena.clear();
        }
        if (exhausted)
            break;
    }
    temp.finish();
    return runs;
}

struct MergeSummary
{
    std::uint64_t records = 0;
    std::uint64_t bytes = 0;
    IoCounters read;  // summed over all run readers
};

/// Pass two: k-way merge of sorted runs through a loser tree. Records that
/// compare equal come out in ascending run order.
template <typename Sink>
MergeSummary merge_runs(const std::vector<RunDescriptor>& runs, const SortConfig& config,
                        const std::filesystem::path& run_file, BlockStreamConfig cfg, Sink& sink)
{
    struct Cursor
    {
        Cursor(const std::filesystem::path& path, BlockStreamConfig cfg, const RunDescriptor& run,
               std::size_t record_max)
            : reader(path, cfg, run.offset, run.byte_length), lines(reader, record_max), run(run) {}

        void advance()
        {
            try {
                current = lines.next();
            } catch (const Error& e) {
                throw Error(e.kind(), "reading run " + std::to_string(run.run_index) + " (file offset " +
                                          std::to_string(run.offset) + "+): " + e.what());
            }
        }

        BlockReader reader;
        LineAssembler<BlockReader> lines;
        RunDescriptor run;
        std::optional<Line> current;
    };

    std::vector<std::unique_ptr<Cursor>> cursors;
    cursors.reserve(runs.size());
    for (const auto& run : runs) {
        try {
            cursors.push_back(std::make_unique<Cursor>(run_file, cfg, run, config.record_max));
        } catch (const Error& e) {
            throw Error(e.kind(), "opening run " + std::to_string(run.run_index) + ": " + e.what());
        }
        cursors.back()->advance();
    }

    auto before = [&cursors, &config](std::size_t i, std::size_t j) {
        const auto& a = cursors[i]->current;
        const auto& b = cursors[j]->current;
        if (!a)
            return false;
        if (!b)
            return true;
        const auto order = record_order(a->content(), a->terminator(), b->content(), b->terminator(), config);
        return order < 0 || (order == 0 && i < j);
    };

    MergeSummary summary;
    LoserTree tree(cursors.size(), before);
    while (tree.top() != tree.npos) {
        Cursor& c = *cursors[tree.top()];
        if (!c.current)
            break;
        sink.write(c.current->bytes);
        summary.records += 1;
        summary.bytes += c.current->bytes.size();
        c.advance();
        tree.replay();
    }
    for (const auto& c : cursors)
        summary.read += c->reader.counters();
    return summary;
}

struct SortSummary
{
    std::uint64_t records = 0;
    std::uint64_t bytes = 0;
    SortPlan plan;
    std::size_t runs = 0;
    double elapsed_seconds = 0;
    IoCounters input;   // reads of the input
    IoCounters temp;    // run writes plus run reads
    IoCounters output;  // writes of the sorted output

    IoCounters total() const { return input + temp + output; }

    std::string counters_line() const
    {
        const IoCounters t = total();
        char stalls[32];
        std::snprintf(stalls, sizeof stalls, "%.6f", seconds(t.stall_time));
        return "read_bytes=" + std::to_string(t.bytes_read) + " written_bytes=" + std::to_string(t.bytes_written) +
               " stalls=" + stalls;
    }
};

inline std::filesystem::path run_file_path(const SortConfig& config)
{
    std::filesystem::path dir = config.temp_dir;
    if (dir.empty())
        dir = std::filesystem::temp_directory_path();
    const std::string stem = config.output ? config.output->stem().string() : std::string("stdout");
    return dir / (stem + ".runs.tmp");
}

/// End-to-end sort: plan, then either sort in memory or form runs and merge.
/// `start` is when timing began; the CLI passes its own start-up time.
inline SortSummary sort(const SortConfig& config,
                        std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now())
{
    config.check();
    const BlockStreamConfig io = stream_config(config);

    std::unique_ptr<BlockReader> reader;
    std::optional<std::uint64_t> input_size;
    if (config.input) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(*config.input, ec);
        if (ec)
            throw io_error("cannot read input " + config.input->string() + ": " + ec.message());
        input_size = size;
        reader = std::make_unique<BlockReader>(*config.input, io);
    } else {
        struct stat st{};
        if (::fstat(STDIN_FILENO, &st) == 0 && S_ISREG(st.st_mode)) {
            const off_t pos = ::lseek(STDIN_FILENO, 0, SEEK_CUR);
            input_size = static_cast<std::uint64_t>(st.st_size - (pos > 0 ? pos : 0));
        }
        BlockStreamConfig stdin_io = io;
        stdin_io.direct_io = false;
        reader = std::make_unique<BlockReader>(STDIN_FILENO, stdin_io);
    }

    const std::uint64_t memory = memory_budget_bytes(config);
    SortSummary summary;
    summary.plan = input_size ? plan_sort(*input_size, config, memory) : plan_stream_sort(config, memory);

    auto open_output = [&] {
        if (config.output)
            return std::make_unique<BlockWriter>(*config.output, io);
        BlockStreamConfig stdout_io = io;
        stdout_io.direct_io = false;
        return std::make_unique<BlockWriter>(STDOUT_FILENO, stdout_io);
    };

    LineAssembler<BlockReader> lines(*reader, config.record_max);
    ChunkReader<BlockReader> chunks(lines);
    RecordArena arena;
    const std::uint64_t first_limit =
        summary.plan.mode == SortMode::one_pass ? summary.plan.working_memory_bytes : summary.plan.run_bytes;
    arena.reserve(summary.plan.mode == SortMode::one_pass ? summary.plan.input_bytes : summary.plan.run_bytes);

    if (chunks.fill(arena, first_limit)) {
        // Everything fit in memory.
        if (summary.plan.mode == SortMode::two_pass) {
            summary.plan.mode = SortMode::one_pass;
            summary.plan.input_bytes = reader->counters().bytes_read;
        }
        summary.input = reader->counters();
        reader.reset();
        arena.sort(config);
        auto out = open_output();
        arena.write_to(*out);
        out->close();
        summary.output = out->counters();
        summary.records = arena.records();
        summary.bytes = arena.bytes();
    } else {
        TempRunStore temp(run_file_path(config), io);
        std::vector<RunDescriptor> runs;
        arena.sort(config);
        runs.push_back(temp.append(arena));
        arena.clear();
        for (bool exhausted = false; !exhausted;) {
            exhausted = chunks.fill(arena, summary.plan.run_bytes);
            if (!arena.empty()) {
                arena.sort(config);
                runs.push_back(temp.append(arena));
                arena.clear();
            }
        }
        temp.finish();
        summary.input = reader->counters();
        reader.reset();
        arena = RecordArena{};

        summary.plan.input_bytes = summary.input.bytes_read;
        summary.plan.estimated_run_count = runs.size();
        if ((runs.size() + 1) * summary.plan.merge_buffer_bytes > summary.plan.working_memory_bytes) {
            throw Error(ErrorKind::infeasible,
                        "two-pass infeasible: " + std::to_string(runs.size()) + " runs need at least " +
                            std::to_string(detail::min_two_pass_memory(summary.plan.input_bytes,
                                                                       config.transfer_bytes)) +
                            " bytes of memory to merge, have " +
                            std::to_string(summary.plan.working_memory_bytes));
        }

        auto out = open_output();
        const MergeSummary merged = merge_runs(runs, config, temp.path(), io, *out);
        out->close();
        summary.temp = temp.write_counters() + merged.read;
        summary.output = out->counters();
        summary.records = merged.records;
        summary.bytes = merged.bytes;
        summary.runs = runs.size();
    }
    summary.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

} // namespace pennysort
