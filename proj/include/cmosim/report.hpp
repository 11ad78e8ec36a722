#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmosim/pricer.hpp"

namespace cmosim {

constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string csv_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline nlohmann::json histogram_to_json(const Histogram& h) {
    return {{"edges", h.edges}, {"counts", h.counts}};
}

inline nlohmann::json summary_to_json(const SimulationSummary& s) {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& t : s.series)
        series.push_back({{"name", t.name},
                          {"mean", t.mean},
                          {"stddev", t.stddev},
                          {"histogram", histogram_to_json(t.histogram)}});
    return {{"schema_version", kSchemaVersion},
            {"model", s.model},
            {"iterations", s.iterations},
            {"seed", s.seed},
            {"degenerate_std", s.degenerate_std},
            {"series", series}};
}

inline nlohmann::json comparison_to_json(const ComparisonReport& r) {
    nlohmann::json series = nlohmann::json::array();
    for (std::size_t i = 0; i < r.series_names.size(); ++i)
        series.push_back({{"name", r.series_names[i]},
                          {"mean_basel", r.mean_basel[i]},
                          {"mean_copula", r.mean_copula[i]}});
    return {{"schema_version", kSchemaVersion},
            {"iterations", r.iterations},
            {"seed", r.seed},
            {"crn", r.crn},
            {"series", series},
            {"mean_difference", r.mean_difference},
            {"t_statistic", r.t_statistic},
            {"p_value", r.p_value},
            {"test", "paired two-sided t"},
            {"reject_equal_means_at_99", r.reject_at_99}};
}

inline std::string histogram_csv(const Histogram& h) {
    std::ostringstream out;
    out << "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << detail::csv_double(h.edges[i]) << "," << detail::csv_double(h.edges[i + 1]) << ","
            << h.counts[i] << "\n";
    return out.str();
}

// Per-iteration raw tranche values: iteration,<tranche...>,total.
inline std::string values_csv(const DealSpec& deal, const std::vector<IterationResult>& results) {
    std::ostringstream out;
    out << "iteration";
    for (const auto& t : deal.tranches) out << "," << t.name;
    out << ",total\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        out << i;
        for (double v : results[i].tranche_values) out << "," << detail::csv_double(v);
        out << "," << detail::csv_double(results[i].total_value) << "\n";
    }
    return out.str();
}

// Month-by-month pool cash flows and tranche payments for one iteration.
inline std::string trace_csv(const DealSpec& deal, const MonthTrace& trace) {
    std::ostringstream out;
    out << "month,balance_start,defaulted,B_prime,MP,IP,SP,PP,CF";
    for (const auto& t : deal.tranches) out << "," << t.name << "_prin," << t.name << "_int";
    out << "\n";
    for (std::size_t m = 0; m < trace.pool.size(); ++m) {
        const PoolCashFlow& cf = trace.pool[m];
        out << cf.month << "," << detail::csv_double(cf.balance_start) << ","
            << detail::csv_double(cf.defaulted) << ","
            << detail::csv_double(cf.balance_after_default) << ","
            << detail::csv_double(cf.scheduled_payment) << "," << detail::csv_double(cf.interest)
            << "," << detail::csv_double(cf.scheduled_principal) << ","
            << detail::csv_double(cf.prepayment) << "," << detail::csv_double(cf.total);
        for (const auto& p : trace.payments[m])
            out << "," << detail::csv_double(p.principal) << "," << detail::csv_double(p.interest);
        out << "\n";
    }
    return out.str();
}

// Writes via a temporary file and renames into place, so a failed run never
// leaves a partially written output behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace cmosim
