#pragma once

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "pennysort/bounded_queue.hpp"
#include "pennysort/error.hpp"

namespace pennysort {

inline constexpr std::size_t kIoAlignment = 4096;

struct BlockStreamConfig
{
    std::size_t transfer_bytes = 262144;
    bool direct_io = false;       // best effort; falls back with a notice
    std::size_t queue_depth = 2;  // 1 = synchronous, >= 2 = background agent

    void check() const
    {
        if (transfer_bytes == 0 || transfer_bytes % kIoAlignment != 0)
            throw usage_error("transfer size must be a positive multiple of 4096");
        if (queue_depth < 1)
            throw usage_error("queue depth must be at least 1");
    }
};

struct IoCounters
{
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t read_ops = 0;
    std::uint64_t write_ops = 0;
    std::chrono::nanoseconds stall_time{0};

    IoCounters& operator+=(const IoCounters& other)
    {
        bytes_read += other.bytes_read;
        bytes_written += other.bytes_written;
        read_ops += other.read_ops;
        write_ops += other.write_ops;
        stall_time += other.stall_time;
        return *this;
    }

    friend IoCounters operator+(IoCounters a, const IoCounters& b) { return a += b; }
};

inline double seconds(std::chrono::nanoseconds d)
{
    return std::chrono::duration<double>(d).count();
}

/// Receives notices such as "direct IO unavailable". Defaults to std::clog.
inline std::function<void(std::string_view)>& notice_sink()
{
    static std::function<void(std::string_view)> sink = [](std::string_view msg) {
        std::clog << "pennysort: " << msg << '\n';
    };
    return sink;
}

namespace detail {

// Reported once per process so large merges do not flood the log.
inline void direct_io_fallback(const std::string& where, int err)
{
    static std::atomic<bool> reported{false};
    if (!reported.exchange(true) && notice_sink())
        notice_sink()("direct IO unavailable for " + where + " (" + std::strerror(err) +
                      "); using buffered IO");
}

struct FreeDeleter
{
    void operator()(char* p) const noexcept { std::free(p); }
};

class AlignedBuffer
{
public:
    explicit AlignedBuffer(std::size_t size)
        : data_(static_cast<char*>(std::aligned_alloc(kIoAlignment, size))), size_(size)
    {
        if (!data_)
            throw std::bad_alloc();
    }

    char* data() noexcept { return data_.get(); }
    const char* data() const noexcept { return data_.get(); }
    std::size_t size() const noexcept { return size_; }

private:
    std::unique_ptr<char, FreeDeleter> data_;
    std::size_t size_;
};

class FileHandle
{
public:
    FileHandle() = default;
    FileHandle(int fd, bool owned) : fd_(fd), owned_(owned) {}
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
    FileHandle(FileHandle&& other) noexcept
        : fd_(std::exchange(other.fd_, -1)), owned_(other.owned_) {}
    FileHandle& operator=(FileHandle&& other) noexcept
    {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
            owned_ = other.owned_;
        }
        return *this;
    }
    ~FileHandle() { reset(); }

    int get() const noexcept { return fd_; }

    int release_close()
    {
        int rc = 0;
        if (fd_ >= 0 && owned_)
            rc = ::close(fd_);
        fd_ = -1;
        return rc;
    }

    void reset() noexcept
    {
        if (fd_ >= 0 && owned_)
            ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
    bool owned_ = false;
};

inline std::string errno_text(int err) { return std::strerror(err); }

// Opens with O_DIRECT when requested, retrying without it if the filesystem
// refuses. `direct` reports what was actually obtained.
inline FileHandle open_file(const std::filesystem::path& path, int flags, bool want_direct,
                            bool& direct)
{
    direct = false;
#ifdef O_DIRECT
    if (want_direct) {
        const int fd = ::open(path.c_str(), flags | O_DIRECT | O_CLOEXEC, 0644);
        if (fd >= 0) {
            direct = true;
            return {fd, true};
        }
        if (errno != EINVAL)
            throw io_error("cannot open " + path.string() + ": " + errno_text(errno));
        direct_io_fallback(path.string(), errno);
    }
#else
    if (want_direct)
        direct_io_fallback(path.string(), ENOTSUP);
#endif
    const int fd = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
    if (fd < 0)
        throw io_error("cannot open " + path.string() + ": " + errno_text(errno));
    return {fd, true};
}

inline bool drop_direct(int fd, const std::string& name)
{
#ifdef O_DIRECT
    const int flags = ::fcntl(fd, F_GETFL);
    if (flags >= 0 && (flags & O_DIRECT) && ::fcntl(fd, F_SETFL, flags & ~O_DIRECT) == 0) {
        direct_io_fallback(name, EINVAL);
        return true;
    }
#endif
    (void)fd;
    (void)name;
    return false;
}

inline std::size_t round_up(std::size_t n, std::size_t to) { return (n + to - 1) / to * to; }

} // namespace detail

/// Reads a file (or a byte range of it) in transfer-sized blocks.
///
/// With queue_depth >= 2 a background agent reads ahead into a pool of
/// aligned buffers while the caller consumes the current block. The span
/// returned by next_block() is valid until the following call.
class BlockReader
{
public:
    BlockReader(const std::filesystem::path& path, BlockStreamConfig cfg, std::uint64_t offset = 0,
                std::optional<std::uint64_t> length = std::nullopt)
        : cfg_(cfg), name_(path.string()), offset_(offset), remaining_(length)
    {
        cfg_.check();
        if (cfg_.direct_io && offset % kIoAlignment != 0)
            cfg_.direct_io = false;
        bool direct = false;
        file_ = detail::open_file(path, O_RDONLY, cfg_.direct_io, direct);
        direct_ = direct;
        if (offset != 0 && ::lseek(file_.get(), static_cast<off_t>(offset), SEEK_SET) < 0)
            throw io_error("cannot seek " + name_ + " to offset " + std::to_string(offset) + ": " +
                           detail::errno_text(errno));
        start();
    }

    // Reads from a descriptor the caller keeps ownership of (e.g. stdin).
    BlockReader(int borrowed_fd, BlockStreamConfig cfg, std::string name = "<stdin>")
        : cfg_(cfg), name_(std::move(name))
    {
        cfg_.check();
        file_ = detail::FileHandle(borrowed_fd, false);
        start();
    }

    BlockReader(const BlockReader&) = delete;
    BlockReader& operator=(const BlockReader&) = delete;

    ~BlockReader() { stop(); }

    std::span<const char> next_block()
    {
        if (done_)
            return {};
        if (!async()) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::size_t n = read_block(buffers_[0]);
            counters_.stall_time += std::chrono::steady_clock::now() - t0;
            return deliver(0, n);
        }
        if (held_) {
            free_->push(*held_);
            held_.reset();
        }
        const auto t0 = std::chrono::steady_clock::now();
        auto filled = full_->pop();
        counters_.stall_time += std::chrono::steady_clock::now() - t0;
        if (!filled || filled->buffer == kNone) {
            done_ = true;
            if (error_)
                std::rethrow_exception(error_);
            return {};
        }
        held_ = filled->buffer;
        return deliver(filled->buffer, filled->length);
    }

    const IoCounters& counters() const noexcept { return counters_; }
    bool direct() const noexcept { return direct_; }
    const BlockStreamConfig& config() const noexcept { return cfg_; }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    struct Filled
    {
        std::size_t buffer;
        std::size_t length;
    };

    bool async() const noexcept { return cfg_.queue_depth >= 2; }

    void start()
    {
        const std::size_t count = async() ? cfg_.queue_depth : 1;
        buffers_.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            buffers_.emplace_back(cfg_.transfer_bytes);
        if (!async())
            return;
        free_ = std::make_unique<BoundedQueue<std::size_t>>(count);
        full_ = std::make_unique<BoundedQueue<Filled>>(count);
        for (std::size_t i = 0; i < count; ++i)
            free_->push(i);
        agent_ = std::thread([this] { run_agent(); });
    }

    void stop()
    {
        if (agent_.joinable()) {
            free_->close();
            full_->close();
            agent_.join();
        }
    }

    void run_agent()
    {
        try {
            while (auto idx = free_->pop()) {
                const std::size_t n = read_block(buffers_[*idx]);
                if (n == 0) {
                    full_->push({kNone, 0});
                    return;
                }
                if (!full_->push({*idx, n}))
                    return;
            }
        } catch (...) {
            error_ = std::current_exception();
            full_->push({kNone, 0});
        }
    }

    std::span<const char> deliver(std::size_t buffer, std::size_t n)
    {
        if (n == 0) {
            done_ = true;
            return {};
        }
        counters_.bytes_read += n;
        counters_.read_ops += 1;
        return {buffers_[buffer].data(), n};
    }

    // Runs on the agent thread in async mode; touches only file state.
    std::size_t read_block(detail::AlignedBuffer& buf)
    {
        std::size_t want = cfg_.transfer_bytes;
        if (remaining_) {
            if (*remaining_ == 0)
                return 0;
            want = static_cast<std::size_t>(std::min<std::uint64_t>(want, *remaining_));
        }
        std::size_t request = direct_ ? detail::round_up(want, kIoAlignment) : want;
        std::size_t got = 0;
        while (got < request) {
            const ssize_t r = ::read(file_.get(), buf.data() + got, request - got);
            if (r < 0) {
                if (errno == EINTR)
                    continue;
                if (errno == EINVAL && direct_ && detail::drop_direct(file_.get(), name_)) {
                    direct_ = false;
                    continue;
                }
                throw io_error("read failed on " + name_ + " at offset " +
                               std::to_string(offset_ + got) + ": " + detail::errno_text(errno));
            }
            if (r == 0)
                break;
            got += static_cast<std::size_t>(r);
            // Short reads on a direct descriptor only happen at end of file.
            if (direct_ && got % kIoAlignment != 0)
                break;
        }
        const std::size_t delivered = std::min(got, want);
        if (remaining_)
            *remaining_ -= delivered;
        offset_ += delivered;
        return delivered;
    }

    BlockStreamConfig cfg_;
    std::string name_;
    detail::FileHandle file_;
    std::atomic<bool> direct_{false};
    std::uint64_t offset_ = 0;
    std::optional<std::uint64_t> remaining_;
    std::vector<detail::AlignedBuffer> buffers_;
    std::unique_ptr<BoundedQueue<std::size_t>> free_;
    std::unique_ptr<BoundedQueue<Filled>> full_;
    std::optional<std::size_t> held_;
    std::exception_ptr error_;
    std::thread agent_;
    bool done_ = false;
    IoCounters counters_;
};

/// Buffers writes into transfer-sized blocks.
///
/// With queue_depth >= 2 full blocks are handed to a background agent so the
/// caller keeps filling the next one. Under direct IO the final partial block
/// is zero-padded to the alignment and the file is truncated back on close().
class BlockWriter
{
public:
    BlockWriter(const std::filesystem::path& path, BlockStreamConfig cfg) : cfg_(cfg), name_(path.string())
    {
        cfg_.check();
        bool direct = false;
        file_ = detail::open_file(path, O_WRONLY | O_CREAT | O_TRUNC, cfg_.direct_io, direct);
        direct_ = direct;
        truncatable_ = true;
        start();
    }

    // Writes to a descriptor the caller keeps ownership of (e.g. stdout).
    BlockWriter(int borrowed_fd, BlockStreamConfig cfg, std::string name = "<stdout>")
        : cfg_(cfg), name_(std::move(name))
    {
        cfg_.check();
        cfg_.direct_io = false;
        file_ = detail::FileHandle(borrowed_fd, false);
        start();
    }

    BlockWriter(const BlockWriter&) = delete;
    BlockWriter& operator=(const BlockWriter&) = delete;

    ~BlockWriter()
    {
        if (!closed_) {
            try {
                close();
            } catch (...) {
            }
        }
    }

    void write(std::string_view bytes)
    {
        if (closed_)
            throw usage_error("write to closed stream " + name_);
        counters_.bytes_written += bytes.size();
        while (!bytes.empty()) {
            const std::size_t n = std::min(bytes.size(), cfg_.transfer_bytes - fill_);
            std::memcpy(buffers_[current_].data() + fill_, bytes.data(), n);
            fill_ += n;
            position_ += n;
            bytes.remove_prefix(n);
            if (fill_ == cfg_.transfer_bytes)
                submit(fill_);
        }
    }

    // Under direct IO, zero-pads so the next byte lands on an aligned offset.
    // A no-op for buffered streams.
    void align()
    {
        if (!direct_)
            return;
        const std::size_t pad = detail::round_up(fill_, kIoAlignment) - fill_;
        std::memset(buffers_[current_].data() + fill_, 0, pad);
        fill_ += pad;
        position_ += pad;
        if (fill_ == cfg_.transfer_bytes)
            submit(fill_);
    }

    // Physical offset of the next byte written.
    std::uint64_t position() const noexcept { return position_; }

    void close()
    {
        if (closed_)
            throw usage_error("stream " + name_ + " closed twice");
        closed_ = true;
        bool padded = false;
        if (fill_ > 0) {
            std::size_t len = fill_;
            if (direct_) {
                len = detail::round_up(fill_, kIoAlignment);
                std::memset(buffers_[current_].data() + fill_, 0, len - fill_);
                padded = len != fill_;
            }
            submit_final(len);
        }
        if (async()) {
            full_->close();
            const auto t0 = std::chrono::steady_clock::now();
            agent_.join();
            counters_.stall_time += std::chrono::steady_clock::now() - t0;
        }
        if (error_)
            std::rethrow_exception(error_);
        if (padded && truncatable_ &&
            ::ftruncate(file_.get(), static_cast<off_t>(position_)) != 0)
            throw io_error("cannot truncate " + name_ + ": " + detail::errno_text(errno));
        if (file_.release_close() != 0)
            throw io_error("close failed on " + name_ + ": " + detail::errno_text(errno));
    }

    const IoCounters& counters() const noexcept { return counters_; }
    bool direct() const noexcept { return direct_; }

private:
    struct Filled
    {
        std::size_t buffer;
        std::size_t length;
    };

    bool async() const noexcept { return cfg_.queue_depth >= 2; }

    void start()
    {
        const std::size_t count = async() ? cfg_.queue_depth : 1;
        buffers_.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            buffers_.emplace_back(cfg_.transfer_bytes);
        if (!async())
            return;
        free_ = std::make_unique<BoundedQueue<std::size_t>>(count);
        full_ = std::make_unique<BoundedQueue<Filled>>(count);
        for (std::size_t i = 1; i < count; ++i)
            free_->push(i);
        current_ = 0;
        agent_ = std::thread([this] { run_agent(); });
    }

    void submit(std::size_t len)
    {
        counters_.write_ops += 1;
        if (!async()) {
            const auto t0 = std::chrono::steady_clock::now();
            write_block(buffers_[0].data(), len);
            counters_.stall_time += std::chrono::steady_clock::now() - t0;
            fill_ = 0;
            return;
        }
        full_->push({current_, len});
        const auto t0 = std::chrono::steady_clock::now();
        auto next = free_->pop();
        counters_.stall_time += std::chrono::steady_clock::now() - t0;
        if (!next) {
            closed_ = true;
            agent_.join();
            std::rethrow_exception(error_);
        }
        current_ = *next;
        fill_ = 0;
    }

    void submit_final(std::size_t len)
    {
        counters_.write_ops += 1;
        if (!async()) {
            write_block(buffers_[0].data(), len);
            fill_ = 0;
            return;
        }
        full_->push({current_, len});
        fill_ = 0;
    }

    void run_agent()
    {
        try {
            while (auto filled = full_->pop()) {
                write_block(buffers_[filled->buffer].data(), filled->length);
                free_->push(filled->buffer);
            }
        } catch (...) {
            error_ = std::current_exception();
            free_->close();
            full_->close();
        }
    }

    void write_block(const char* data, std::size_t len)
    {
        std::size_t done = 0;
        while (done < len) {
            const ssize_t r = ::write(file_.get(), data + done, len - done);
            if (r < 0) {
                if (errno == EINTR)
                    continue;
                if (errno == EINVAL && direct_ && detail::drop_direct(file_.get(), name_)) {
                    direct_ = false;
                    continue;
                }
                throw io_error("write failed on " + name_ + " at offset " +
                               std::to_string(written_ + done) + ": " + detail::errno_text(errno));
            }
            done += static_cast<std::size_t>(r);
        }
        written_ += len;
    }

    BlockStreamConfig cfg_;
    std::string name_;
    detail::FileHandle file_;
    std::atomic<bool> direct_{false};
    bool truncatable_ = false;
    bool closed_ = false;
    std::vector<detail::AlignedBuffer> buffers_;
    std::size_t current_ = 0;
    std::size_t fill_ = 0;
    std::uint64_t position_ = 0;
    std::uint64_t written_ = 0;  // agent-side physical offset
    std::unique_ptr<BoundedQueue<std::size_t>> free_;
    std::unique_ptr<BoundedQueue<Filled>> full_;
    std::exception_ptr error_;
    std::thread agent_;
    IoCounters counters_;
};

struct CopyReport
{
    std::uint64_t bytes = 0;
    double elapsed_seconds = 0;
    double mib_per_second = 0;
    IoCounters read;
    IoCounters written;
};

/// Streams src to dst in transfer-sized blocks and reports the throughput.
/// Used to calibrate how long the IO of a sort will take on this machine.
inline CopyReport copy_baseline(const std::filesystem::path& src, const std::filesystem::path& dst,
                                BlockStreamConfig cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    CopyReport report;
    {
        BlockReader reader(src, cfg);
        BlockWriter writer(dst, cfg);
        for (auto block = reader.next_block(); !block.empty(); block = reader.next_block())
            writer.write({block.data(), block.size()});
        writer.close();
        report.read = reader.counters();
        report.written = writer.counters();
    }
    report.bytes = report.read.bytes_read;
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.mib_per_second =
        report.elapsed_seconds > 0 ? static_cast<double>(report.bytes) / (1 << 20) / report.elapsed_seconds : 0.0;
    return report;
}

} // namespace pennysort
