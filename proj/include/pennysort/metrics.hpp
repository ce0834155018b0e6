#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pennysort/error.hpp"

namespace pennysort {

inline constexpr double kMiB = 1024.0 * 1024.0;
inline constexpr double kGiB = kMiB * 1024.0;

/// System price depreciated over three years.
struct PriceModel
{
    static constexpr std::int64_t depreciation_seconds = 94'608'000;

    double system_price_usd = 0;

    void check() const
    {
        if (!(system_price_usd > 0) || !std::isfinite(system_price_usd))
            throw usage_error("system price must be positive");
    }
};

/// Wall-clock seconds one penny of depreciated system cost buys.
inline double penny_budget(const PriceModel& price)
{
    price.check();
    return static_cast<double>(PriceModel::depreciation_seconds) / (price.system_price_usd * 100.0);
}

/// GiB sorted per dollar of depreciated system time.
///
/// `window_seconds` is how long the sort was allowed to run: 60 for the
/// minute-based metric, penny_budget(price) for a PennySort result (the window
/// then costs exactly one cent, so the figure is GiB per penny times 100).
inline double gb_per_dollar(std::uint64_t bytes_sorted, const PriceModel& price, double window_seconds = 60.0)
{
    price.check();
    if (!(window_seconds > 0))
        throw usage_error("time window must be positive");
    const double window_cost =
        price.system_price_usd * window_seconds / static_cast<double>(PriceModel::depreciation_seconds);
    return static_cast<double>(bytes_sorted) / kGiB / window_cost;
}

enum class BenchMode { datamation, minutesort, pennysort, perf_price };
enum class Category { daytona, indy };

inline const char* to_string(BenchMode mode)
{
    switch (mode) {
    case BenchMode::datamation:
        return "datamation";
    case BenchMode::minutesort:
        return "minutesort";
    case BenchMode::pennysort:
        return "pennysort";
    case BenchMode::perf_price:
        return "perf_price";
    }
    return "?";
}

inline const char* to_string(Category c) { return c == Category::daytona ? "Daytona" : "Indy"; }

inline BenchMode parse_mode(std::string_view s)
{
    if (s == "datamation")
        return BenchMode::datamation;
    if (s == "minutesort")
        return BenchMode::minutesort;
    if (s == "pennysort")
        return BenchMode::pennysort;
    if (s == "perf_price" || s == "perf-price")
        return BenchMode::perf_price;
    throw usage_error("unknown benchmark mode '" + std::string(s) + "'");
}

inline Category parse_category(std::string_view s)
{
    if (s == "Daytona" || s == "daytona")
        return Category::daytona;
    if (s == "Indy" || s == "indy")
        return Category::indy;
    throw usage_error("unknown category '" + std::string(s) + "' (expected Daytona or Indy)");
}

struct BenchmarkResult
{
    std::string product = "pennysort";
    BenchMode mode = BenchMode::datamation;
    Category category = Category::indy;
    double elapsed_seconds = 0;
    std::optional<double> cpu_kernel_seconds;
    std::optional<double> cpu_user_seconds;
    std::uint64_t bytes_sorted = 0;
    std::uint64_t records_sorted = 0;
    std::optional<double> budget_seconds;
    std::optional<double> gb_per_dollar;
    bool valid = true;
    std::optional<double> overrun_seconds;

    double mb_sorted() const { return static_cast<double>(bytes_sorted) / kMiB; }

    std::optional<double> total_cpu_seconds() const
    {
        if (!cpu_kernel_seconds && !cpu_user_seconds)
            return std::nullopt;
        return cpu_kernel_seconds.value_or(0) + cpu_user_seconds.value_or(0);
    }

    std::string line() const;
};

namespace detail {

inline std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string fixed(const std::optional<double>& v, int decimals)
{
    return v ? fixed(*v, decimals) : std::string();
}

// Whole numbers for large values, as in the published tables.
inline std::string table_number(const std::optional<double>& v)
{
    if (!v)
        return "-";
    return std::fabs(*v) >= 10 ? fixed(std::round(*v), 0) : fixed(*v, 2);
}

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

inline std::string BenchmarkResult::line() const
{
    std::string s = "product=" + product + " mode=" + to_string(mode) + " category=" + to_string(category);
    if (budget_seconds)
        s += " budget_s=" + detail::fixed(*budget_seconds, 1);
    s += " elapsed_s=" + detail::fixed(elapsed_seconds, 3);
    if (cpu_kernel_seconds)
        s += " cpu_kernel_s=" + detail::fixed(*cpu_kernel_seconds, 3);
    if (cpu_user_seconds)
        s += " cpu_user_s=" + detail::fixed(*cpu_user_seconds, 3);
    s += " records=" + std::to_string(records_sorted) + " sorted_mib=" + detail::fixed(mb_sorted(), 3);
    if (gb_per_dollar)
        s += " gib_per_dollar=" + detail::fixed(*gb_per_dollar, 3);
    s += std::string(" valid=") + (valid ? "true" : "false");
    if (overrun_seconds)
        s += " overrun_s=" + detail::fixed(*overrun_seconds, 1);
    return s;
}

/// Fills in the penny budget and GB/$ of a PennySort result and marks it
/// invalid, with the overrun, when it took longer than the budget.
inline void apply_penny_budget(BenchmarkResult& r, const PriceModel& price)
{
    const double budget = penny_budget(price);
    r.budget_seconds = budget;
    r.gb_per_dollar = gb_per_dollar(r.bytes_sorted, price, budget);
    if (r.elapsed_seconds > budget) {
        r.valid = false;
        r.overrun_seconds = r.elapsed_seconds - budget;
    }
}

inline constexpr std::string_view kCsvHeader =
    "product,mode,category,budget_s,elapsed_s,cpu_kernel_s,cpu_user_s,sorted_mib,gib_per_dollar,valid";

inline std::string csv_row(const BenchmarkResult& r)
{
    std::string s = detail::csv_field(r.product);
    s += ',';
    s += to_string(r.mode);
    s += ',';
    s += to_string(r.category);
    s += ',' + detail::fixed(r.budget_seconds, 3);
    s += ',' + detail::fixed(r.elapsed_seconds, 6);
    s += ',' + detail::fixed(r.cpu_kernel_seconds, 6);
    s += ',' + detail::fixed(r.cpu_user_seconds, 6);
    s += ',' + detail::fixed(r.mb_sorted(), 6);
    s += ',' + detail::fixed(r.gb_per_dollar, 6);
    s += r.valid ? ",true" : ",false";
    return s;
}

/// Splits RFC 4180 text into records of fields.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted)
        throw format_error("unterminated quoted CSV field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline std::optional<double> parse_optional_number(const std::string& s, const char* column)
{
    if (s.empty())
        return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw format_error(std::string("bad number in column ") + column + ": '" + s + "'");
    return v;
}

} // namespace detail

/// Reads rows written by csv_row (with the header line) back into results.
inline std::vector<BenchmarkResult> parse_results_csv(std::string_view text)
{
    const auto rows = parse_csv(text);
    if (rows.empty())
        return {};
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        header += (i ? "," : "") + rows[0][i];
    if (header != kCsvHeader)
        throw format_error("unexpected CSV header: " + header);
    std::vector<BenchmarkResult> results;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != 10)
            throw format_error("CSV row " + std::to_string(r) + " has " + std::to_string(f.size()) +
                               " fields, expected 10");
        BenchmarkResult res;
        res.product = f[0];
        res.mode = parse_mode(f[1]);
        res.category = parse_category(f[2]);
        res.budget_seconds = detail::parse_optional_number(f[3], "budget_s");
        res.elapsed_seconds = detail::parse_optional_number(f[4], "elapsed_s").value_or(0);
        res.cpu_kernel_seconds = detail::parse_optional_number(f[5], "cpu_kernel_s");
        res.cpu_user_seconds = detail::parse_optional_number(f[6], "cpu_user_s");
        const double mib = detail::parse_optional_number(f[7], "sorted_mib").value_or(0);
        res.bytes_sorted = static_cast<std::uint64_t>(std::llround(mib * kMiB));
        res.gb_per_dollar = detail::parse_optional_number(f[8], "gib_per_dollar");
        if (f[9] != "true" && f[9] != "false")
            throw format_error("bad value in column valid: '" + f[9] + "'");
        res.valid = f[9] == "true";
        results.push_back(std::move(res));
    }
    return results;
}

// Published performance/price history, shown for context only.
struct HistoricalResult
{
    int year;
    double mb_per_sec;
    double gb_per_dollar;
    std::string_view system;
    double price_musd;  // millions of dollars
    int cpus;
    std::string_view category;
};

inline constexpr std::array<HistoricalResult, 15> kHistory{{
    {1985, 0.02, 0.05, "M6800 Bitton et al [7,8]", 0.03, 1, "Datamation"},
    {1986, 0.03, 0.01, "Tandem Tsukerman [19,20]", 0.3, 3, "Datamation"},
    {1987, 3.85, 0.05, "Cray YMP, Weinberger [21]", 7.0, 1, "Datamation"},
    {1991, 14.29, 0.54, "IBM 3090, DFsort/Saber", 2.5, 1, "Datamation"},
    {1990, 0.31, 0.15, "Kitsuregawa [12]", 0.2, 1, "Datamation"},
    {1993, 1.20, 0.11, "Sequent, Graefe [11]", 1.0, 32, "Datamation"},
    {1994, 1.72, 0.16, "IPSC/Wisc DeWitt [10]", 1.0, 32, "Datamation"},
    {1994, 11.11, 5.25, "Alpha, Nyberg [7]", 0.2, 1, "Datamation"},
    {1995, 28.57, 2.70, "SGI/Ordinal, Nyberg [16]", 1.0, 16, "Minute/Daytona"},
    {1995, 19.61, 37.10, "IBM, Agarwal [2]", 0.05, 1, "Minute/Indy"},
    {1996, 100.00, 15.76, "NOW, Arpaci-Dusseau [3]", 0.6, 32, "Minute/Indy"},
    {1997, 140.17, 8.41, "Now 95, Arpaci-Dusseau [3]", 2.0, 95, "Minute/Indy"},
    {1997, 86.21, 6.27, "SGI/Ordinal, Nyberg [17]", 1.3, 14, "Minute/Datona"},
    {1998, 1.74, 125.00, "PostmanSort", 0.0013, 1, "Penny/Datona"},
    {1998, 1.74, 144.00, "NTsort", 0.0012, 1, "Penny/Indy"},
}};

enum class ReportFormat { text, csv };

namespace detail {

inline std::string pad(std::string s, std::size_t width, bool right)
{
    if (s.size() >= width)
        return s;
    const std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
}

inline std::string render_table(const std::vector<std::vector<std::string>>& rows, std::size_t left_cols)
{
    std::vector<std::size_t> widths;
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (widths.size() <= i)
                widths.push_back(0);
            widths[i] = std::max(widths[i], row[i].size());
        }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
            if (i)
                line += "  ";
            line += pad(rows[r][i], widths[i], i >= left_cols && r > 0);
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        out += line + '\n';
    }
    return out;
}

} // namespace detail

/// Renders results as a text table (product, budget, kernel/user/total CPU,
/// elapsed, sorted MB, GB/$, category, validity) or as CSV with a header.
inline std::string render_report(const std::vector<BenchmarkResult>& results, ReportFormat format,
                                 bool include_history = false)
{
    if (results.empty())
        throw usage_error("report needs at least one result");
    if (format == ReportFormat::csv) {
        std::string out(kCsvHeader);
        out += '\n';
        for (const auto& r : results)
            out += csv_row(r) + '\n';
        return out;
    }

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Product", "Mode", "Time Budget", "Kernel", "User", "Total cpu time", "Elapsed", "Sorted MB",
                    "GB/$", "Category", "Valid"});
    for (const auto& r : results) {
        rows.push_back({r.product, to_string(r.mode), detail::table_number(r.budget_seconds),
                        detail::table_number(r.cpu_kernel_seconds), detail::table_number(r.cpu_user_seconds),
                        detail::table_number(r.total_cpu_seconds()), detail::fixed(r.elapsed_seconds, 1),
                        detail::table_number(r.mb_sorted()), detail::table_number(r.gb_per_dollar),
                        to_string(r.category), r.valid ? "yes" : "no"});
    }
    std::string out = detail::render_table(rows, 2);
    if (include_history) {
        std::vector<std::vector<std::string>> hist;
        hist.push_back({"Year", "MB/sec", "GB/$", "System", "Price (M$)", "CPUs", "Category"});
        for (const auto& h : kHistory)
            hist.push_back({std::to_string(h.year), detail::fixed(h.mb_per_sec, 2), detail::fixed(h.gb_per_dollar, 2),
                            std::string(h.system), detail::fixed(h.price_musd, h.price_musd < 0.01 ? 4 : 2),
                            std::to_string(h.cpus), std::string(h.category)});
        out += "\nHistorical performance/price results\n";
        out += detail::render_table(hist, 0);
    }
    return out;
}

} // namespace pennysort
