#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "pennysort/bench.hpp"
#include "pennysort/block_io.hpp"
#include "pennysort/compare.hpp"
#include "pennysort/error.hpp"
#include "pennysort/metrics.hpp"
#include "pennysort/recgen.hpp"
#include "pennysort/sort.hpp"

namespace pennysort {

inline constexpr std::string_view kSortUsage =
    "SORT [/R] [/+n] [/M kilobytes] [/L locale] [/RE recordbytes]\n"
    "     [[drive1:][path1]filename1] [/T [drive2:][path2]] [/O [drive3:][path3]filename3]\n"
    "\n"
    "  /+n                      begin each comparison at character n (1-based); lines with\n"
    "                           fewer than n characters collate before other lines\n"
    "  /L[OCALE] locale         collating locale; \"C\" is the only one supported\n"
    "  /M[EMORY] kilobytes      main memory to use for the sort\n"
    "  /REC[ORD_MAXIMUM] chars  maximum characters per record (default 4096, maximum 65535)\n"
    "  /R[EVERSE]               reverse the sort order\n"
    "  /T[EMPORARY] dir         directory for the run file (default: system temp directory)\n"
    "  /O[UTPUT] file           output file (default: standard output)\n"
    "  --no-overlap             run read, sort and write strictly one after another\n"
    "  --no-direct              use the OS file cache instead of direct IO\n"
    "  --transfer-kb n          IO transfer size in KiB (default 256)\n"
    "  --verbose                print the plan and IO counters on stderr\n"
    "\n"
    "The sort is always case insensitive. Flags may also be written --reverse, --memory, ...\n";

inline constexpr std::string_view kMainUsage =
    "usage: pennysort <verb> [options]\n"
    "\n"
    "verbs:\n"
    "  gen       generate benchmark records\n"
    "  sort      sort lines (NT-style flags, see `pennysort sort --help`)\n"
    "  validate  check that a file is sorted and print its permutation checksum\n"
    "  bench     run a datamation, pennysort, minutesort or perf_price benchmark\n"
    "  report    render benchmark CSV results as a table\n";

struct SortArgs
{
    SortConfig config;
    bool verbose = false;
    bool help = false;
};

namespace detail {

inline std::string upper(std::string_view s)
{
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

enum class SortFlag { reverse, memory, record_max, locale, temporary, output, no_overlap, overlap, no_direct,
                      direct, transfer_kb, verbose, help };

inline std::optional<SortFlag> lookup_sort_flag(const std::string& name)
{
    static const std::pair<const char*, SortFlag> table[] = {
        {"R", SortFlag::reverse},        {"REVERSE", SortFlag::reverse},
        {"M", SortFlag::memory},         {"MEMORY", SortFlag::memory},
        {"RE", SortFlag::record_max},    {"REC", SortFlag::record_max},
        {"RECORD_MAXIMUM", SortFlag::record_max},
        {"L", SortFlag::locale},         {"LOCALE", SortFlag::locale},
        {"T", SortFlag::temporary},      {"TEMPORARY", SortFlag::temporary},
        {"O", SortFlag::output},         {"OUTPUT", SortFlag::output},
        {"NO_OVERLAP", SortFlag::no_overlap}, {"OVERLAP", SortFlag::overlap},
        {"NO_DIRECT", SortFlag::no_direct},   {"DIRECT", SortFlag::direct},
        {"TRANSFER_KB", SortFlag::transfer_kb},
        {"VERBOSE", SortFlag::verbose},  {"?", SortFlag::help}, {"HELP", SortFlag::help},
    };
    for (const auto& [key, flag] : table)
        if (name == key)
            return flag;
    return std::nullopt;
}

} // namespace detail

/// Parses the arguments of the `sort` verb.
///
/// Flags are case-insensitive and may be spelled /X or --x. A /token that is
/// not a known flag is taken as a path, so /tmp/data.txt names a file; an
/// unknown --token is an error.
inline SortArgs parse_sort_command(const std::vector<std::string>& args)
{
    SortArgs out;
    SortConfig& cfg = out.config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& tok = args[i];
        std::string_view body;
        bool dashed = false;
        if (tok.size() > 2 && tok.starts_with("--")) {
            body = std::string_view(tok).substr(2);
            dashed = true;
        } else if (tok.size() > 1 && tok[0] == '/') {
            body = std::string_view(tok).substr(1);
        }

        if (!body.empty() && body[0] == '+') {
            const auto n = detail::parse_uint(body.substr(1));
            if (!n || *n < 1)
                throw usage_error("malformed key offset '" + tok + "': expected /+n with n >= 1");
            cfg.key_offset_n = static_cast<std::size_t>(*n);
            continue;
        }

        std::optional<detail::SortFlag> flag;
        if (!body.empty())
            flag = detail::lookup_sort_flag(detail::upper(body));
        if (!flag) {
            if (dashed)
                throw usage_error("unknown flag '" + tok + "'");
            if (cfg.input)
                throw usage_error("more than one input file given ('" + cfg.input->string() + "' and '" + tok + "')");
            cfg.input = tok;
            continue;
        }

        auto value = [&]() -> const std::string& {
            if (i + 1 >= args.size())
                throw usage_error("flag '" + tok + "' needs a value");
            return args[++i];
        };

        switch (*flag) {
        case detail::SortFlag::reverse:
            cfg.reverse = true;
            break;
        case detail::SortFlag::memory: {
            const auto& v = value();
            const auto kb = detail::parse_uint(v);
            if (!kb || *kb == 0)
                throw usage_error("memory must be a positive number of kilobytes, got '" + v + "'");
            cfg.memory_kilobytes = *kb;
            break;
        }
        case detail::SortFlag::record_max: {
            const auto& v = value();
            const auto n = detail::parse_uint(v);
            if (!n || *n < 1 || *n > kRecordMaxLimit)
                throw usage_error("record maximum must be between 1 and 65535, got '" + v + "'");
            cfg.record_max = static_cast<std::size_t>(*n);
            break;
        }
        case detail::SortFlag::locale: {
            const auto& v = value();
            if (v != "C" && v != "c")
                throw usage_error("unsupported locale '" + v +
                                  "': the \"C\" locale is the fastest collating sequence. "
                                  "It is currently the only alternative.");
            cfg.locale = Locale::c;
            break;
        }
        case detail::SortFlag::temporary:
            cfg.temp_dir = value();
            break;
        case detail::SortFlag::output:
            cfg.output = value();
            break;
        case detail::SortFlag::no_overlap:
            cfg.overlap_io = false;
            break;
        case detail::SortFlag::overlap:
            cfg.overlap_io = true;
            break;
        case detail::SortFlag::no_direct:
            cfg.direct_io = false;
            break;
        case detail::SortFlag::direct:
            cfg.direct_io = true;
            break;
        case detail::SortFlag::transfer_kb: {
            const auto& v = value();
            const auto kb = detail::parse_uint(v);
            if (!kb || *kb == 0 || (*kb * 1024) % kPageBytes != 0)
                throw usage_error("transfer size must be a positive multiple of 4 KiB, got '" + v + "'");
            cfg.transfer_bytes = static_cast<std::size_t>(*kb * 1024);
            break;
        }
        case detail::SortFlag::verbose:
            out.verbose = true;
            break;
        case detail::SortFlag::help:
            out.help = true;
            break;
        }
    }
    cfg.check();
    return out;
}

inline SortConfig parse_sort_args(const std::vector<std::string>& args)
{
    return parse_sort_command(args).config;
}

namespace detail {

inline int run_sort(const std::vector<std::string>& args, std::chrono::steady_clock::time_point start,
                    std::ostream& out, std::ostream& err)
{
    const SortArgs parsed = parse_sort_command(args);
    if (parsed.help) {
        out << kSortUsage;
        return 0;
    }
    out.flush();
    const SortSummary summary = sort(parsed.config, start);
    if (parsed.verbose) {
        err << summary.plan.description() << '\n';
        err << "records=" << summary.records << " bytes=" << summary.bytes << " runs=" << summary.runs
            << " elapsed_s=" << fixed(summary.elapsed_seconds, 3) << '\n';
        err << summary.counters_line() << '\n';
    }
    return 0;
}

inline int run_gen(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"generate benchmark records", "pennysort gen"};
    GenSpec spec;
    std::string path;
    app.add_option("--records,-n", spec.record_count, "number of records")->required();
    app.add_option("--seed,-s", spec.seed, "PRNG seed");
    app.add_option("--record-bytes", spec.record_bytes, "bytes per record including CR LF")->capture_default_str();
    app.add_option("--key-bytes", spec.key_bytes, "key bytes per record")->capture_default_str();
    app.add_option("--out,-o", path, "output file (default: standard output)");
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "pennysort gen: " << e.what() << '\n' << app.help();
        return 1;
    }
    GenSummary summary;
    if (path.empty()) {
        out.flush();
        BlockWriter writer(STDOUT_FILENO, BlockStreamConfig{kDefaultTransferBytes, false, 1});
        summary = generate_to(spec, writer);
        writer.close();
        err << summary.line() << '\n';
    } else {
        summary = generate_file(spec, path);
        out << summary.line() << '\n';
    }
    return 0;
}

inline int run_validate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"check sort order and print the permutation checksum", "pennysort validate"};
    std::string path;
    std::size_t key_offset = 1;
    std::size_t record_max = kDefaultRecordMax;
    bool reverse = false;
    app.add_option("file", path, "file to check (default: standard input)");
    app.add_option("--key-offset,-k", key_offset, "1-based column where comparison starts")->capture_default_str();
    app.add_option("--record-max", record_max, "maximum characters per record")->capture_default_str();
    app.add_flag("--reverse,-r", reverse, "expect descending order");
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "pennysort validate: " << e.what() << '\n' << app.help();
        return 1;
    }
    SortConfig config;
    config.key_offset_n = key_offset;
    config.record_max = record_max;
    config.reverse = reverse;
    config.check();
    ValidationReport report;
    if (path.empty()) {
        BlockReader reader(STDIN_FILENO, BlockStreamConfig{kDefaultTransferBytes, false, 1});
        report = validate_source(reader, config);
    } else {
        report = validate_file(path, config);
    }
    out << report.line() << '\n';
    return report.is_sorted ? 0 : exit_code(ErrorKind::format);
}

inline int run_bench(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"run a sort benchmark", "pennysort bench"};
    BenchOptions opts;
    std::string mode = "datamation";
    std::string category = "Indy";
    std::optional<double> price;
    std::optional<std::uint64_t> memory_kb;
    std::string csv_path;
    std::string temp_dir;
    std::string work_dir;
    bool no_overlap = false;
    bool no_direct = false;
    app.add_option("--mode", mode, "datamation | pennysort | minutesort | perf_price")->capture_default_str();
    app.add_option("--price", price, "system price in US dollars");
    app.add_option("--category", category, "Daytona or Indy")->capture_default_str();
    app.add_option("--product", opts.product, "product name for the report")->capture_default_str();
    app.add_option("--records", opts.records, "records to sort (first probe for the minute modes)")
        ->capture_default_str();
    app.add_option("--seed", opts.seed, "generator seed")->capture_default_str();
    app.add_option("--time-limit", opts.time_limit_seconds, "seconds allowed per minute-mode probe")
        ->capture_default_str();
    app.add_option("--max-probes", opts.max_probes, "sort probes for the minute modes")->capture_default_str();
    app.add_option("--work-dir", work_dir, "directory for generated input and output");
    app.add_option("--temp", temp_dir, "directory for the run file");
    app.add_option("--memory-kb", memory_kb, "sort memory budget in KiB");
    app.add_option("--csv", csv_path, "append the result row to this CSV file");
    app.add_flag("--no-overlap", no_overlap, "disable IO/compute overlap");
    app.add_flag("--no-direct", no_direct, "use buffered IO");
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "pennysort bench: " << e.what() << '\n' << app.help();
        return 1;
    }
    opts.mode = parse_mode(mode);
    opts.category = parse_category(category);
    if (price)
        opts.price = PriceModel{*price};
    opts.sort.memory_kilobytes = memory_kb;
    opts.sort.overlap_io = !no_overlap;
    opts.sort.direct_io = !no_direct;
    opts.sort.temp_dir = temp_dir;
    opts.work_dir = work_dir.empty() ? std::filesystem::temp_directory_path() / "pennysort-bench"
                                     : std::filesystem::path(work_dir);

    if (opts.mode == BenchMode::pennysort && opts.price)
        out << "budget_s=" << fixed(penny_budget(*opts.price), 1) << '\n';
    const BenchmarkResult result = run_benchmark(opts);
    out << result.line() << '\n';
    if (!csv_path.empty()) {
        std::error_code ec;
        const bool fresh = !std::filesystem::exists(csv_path, ec) || std::filesystem::file_size(csv_path, ec) == 0;
        std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
        if (!csv)
            throw io_error("cannot open " + csv_path);
        if (fresh)
            csv << kCsvHeader << '\n';
        csv << csv_row(result) << '\n';
        if (!csv)
            throw io_error("cannot write " + csv_path);
    }
    return result.valid ? 0 : exit_code(ErrorKind::invalid);
}

inline int run_report(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"render benchmark results", "pennysort report"};
    std::string csv_path;
    std::string format = "text";
    bool history = false;
    app.add_option("csv", csv_path, "results CSV written by `bench --csv`")->required();
    app.add_option("--format", format, "text | csv")->capture_default_str();
    app.add_flag("--history", history, "append the historical performance/price table");
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "pennysort report: " << e.what() << '\n' << app.help();
        return 1;
    }
    if (format != "text" && format != "csv")
        throw usage_error("unknown report format '" + format + "'");
    std::ifstream in(csv_path, std::ios::binary);
    if (!in)
        throw io_error("cannot open " + csv_path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto results = parse_results_csv(text);
    out << render_report(results, format == "csv" ? ReportFormat::csv : ReportFormat::text, history);
    return 0;
}

} // namespace detail

/// Dispatches a command line (argv[0] excluded) and maps errors to exit codes:
/// 0 ok, 1 usage, 2 data/format, 3 IO, 4 benchmark invalid.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now())
{
    if (args.empty()) {
        err << kMainUsage;
        return 1;
    }
    const std::string verb = args[0];
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    try {
        if (verb == "sort" || verb == "SORT")
            return detail::run_sort(rest, start, out, err);
        if (verb == "gen")
            return detail::run_gen(rest, out, err);
        if (verb == "validate")
            return detail::run_validate(rest, out, err);
        if (verb == "bench")
            return detail::run_bench(rest, out, err);
        if (verb == "report")
            return detail::run_report(rest, out, err);
        if (verb == "--help" || verb == "-h" || verb == "help") {
            out << kMainUsage;
            return 0;
        }
        err << "pennysort: unknown verb '" << verb << "'\n" << kMainUsage;
        return 1;
    } catch (const Error& e) {
        err << "pennysort " << verb << ": " << e.what() << '\n';
        if (e.kind() == ErrorKind::usage && verb == "sort")
            err << kSortUsage;
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "pennysort " << verb << ": " << e.what() << '\n';
        return exit_code(ErrorKind::io);
    }
}

} // namespace pennysort
