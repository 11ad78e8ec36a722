#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cmosim/cashflow.hpp"
#include "cmosim/credit.hpp"
#include "cmosim/deal.hpp"
#include "cmosim/prepay.hpp"
#include "cmosim/rate_model.hpp"
#include "cmosim/rng.hpp"
#include "cmosim/stats.hpp"

namespace cmosim {

struct IterationDiagnostics {
    double lifetime_default_fraction = 0.0;  // cumulative defaulted principal / B(0)
    double lifetime_prepaid_fraction = 0.0;  // cumulative prepayments / B(0)
};

struct IterationResult {
    std::vector<double> tranche_values;  // present value received by each tranche
    double total_value = 0.0;
    IterationDiagnostics diagnostics;
};

// The named random streams one iteration draws from. Rates and credit are
// derived independently so the credit model can change without disturbing
// the rate path (the basis of the common-random-numbers comparison).
struct StreamSet {
    RandomStream rates;
    RandomStream credit;
};

inline StreamSet iteration_streams(std::uint64_t seed, std::uint64_t iteration,
                                   std::string_view rates_name, CreditModelKind kind) {
    const std::string_view credit_name =
        kind == CreditModelKind::BaselOneFactor ? "credit.basel" : "credit.copula";
    return {make_stream(seed, iteration, rates_name), make_stream(seed, iteration, credit_name)};
}

// Optional month-by-month record of one iteration, for trace output.
struct MonthTrace {
    std::vector<PoolCashFlow> pool;
    std::vector<std::vector<TranchePayment>> payments;
};

// One Monte Carlo iteration: simulate the short-rate path, then walk the
// months applying prepayment, defaults, the cash-flow recursion, the
// tranche waterfall and the junior-first write-down, accumulating each
// tranche's discounted cash. Stops once the pool balance reaches zero.
inline IterationResult run_iteration(const DealSpec& deal, const ModelParams& mp,
                                     const SimulationConfig& cfg, StreamSet& streams,
                                     MonthTrace* trace = nullptr) {
    const int wam = deal.wam;
    const auto short_path = simulate_short_path(mp.cir, wam, streams.rates);

    const OneFactorParams credit = one_factor_params(mp.rho, monthly_default_probability(mp));
    std::vector<double> copula_x;
    if (cfg.credit_model == CreditModelKind::GaussianCopula) {
        const std::vector<double> curve(static_cast<std::size_t>(wam), credit.p);
        copula_x = monthly_default_fractions(
            simulate_copula_pool(credit, cfg.copula_loans, curve, streams.credit));
    }
    double persistent_x = -1.0;
    if (cfg.credit_model == CreditModelKind::BaselOneFactor && cfg.persistent_factor)
        persistent_x = sample_default_fraction(streams.credit.next_uniform(), credit);

    auto tranches = make_tranche_states(deal);
    IterationResult result;
    result.tranche_values.assign(tranches.size(), 0.0);

    const bool discounted = mp.price_convention == PriceConvention::DiscountedAtShortRate;
    double discount = 1.0;
    double balance = deal.pool_balance;
    double defaulted_total = 0.0;
    double prepaid_total = 0.0;

    for (int t = 1; t <= wam && balance > 0.0; ++t) {
        const double r = short_path[static_cast<std::size_t>(t - 1)];

        double cpr = 0.0;
        switch (mp.prepay_model) {
            case PrepayModel::RichardRoll: {
                const double rate_long = long_rate(r, month_tau_years(t, mp.cir), mp.cir, mp.rr);
                cpr = richard_roll_cpr(t, deal.wac, rate_long, {deal.pool_balance, balance}, mp.rr);
                break;
            }
            case PrepayModel::Psa:
                cpr = std::min(psa_cpr(t, mp.psa_multiple), 1.0);
                break;
            case PrepayModel::None:
                break;
        }

        double x = 0.0;
        if (cfg.credit_model == CreditModelKind::BaselOneFactor)
            x = cfg.persistent_factor
                    ? persistent_x
                    : sample_default_fraction(streams.credit.next_uniform(), credit);
        else
            x = copula_x[static_cast<std::size_t>(t - 1)];

        const auto step = pool_step(balance, t, deal.wac, wam, x, smm(cpr), mp.recovery_rate);
        const auto dist = distribute(step.cf, tranches, deal.principal_rule, deal.interest_rule);
        write_down_defaults(step.cf.defaulted - step.cf.recovery_cash, tranches);

        if (discounted) discount /= 1.0 + r / 12.0;
        const double df = discounted ? discount : 1.0;
        for (std::size_t i = 0; i < tranches.size(); ++i)
            result.tranche_values[i] +=
                df * (dist.payments[i].principal + dist.payments[i].interest);

        defaulted_total += step.cf.defaulted;
        prepaid_total += step.cf.prepayment;
        balance = step.next_balance;

        if (trace) {
            trace->pool.push_back(step.cf);
            trace->payments.push_back(dist.payments);
        }
    }

    for (double v : result.tranche_values) result.total_value += v;
    result.diagnostics.lifetime_default_fraction = defaulted_total / deal.pool_balance;
    result.diagnostics.lifetime_prepaid_fraction = prepaid_total / deal.pool_balance;
    return result;
}

// Runs cfg.iterations independent iterations. Every iteration derives its
// streams from (seed, index, name) alone, and results land in a vector
// indexed by iteration, so the outcome does not depend on the number of
// workers or on scheduling.
inline std::vector<IterationResult> run_iterations(const DealSpec& deal, const ModelParams& mp,
                                                   const SimulationConfig& cfg, int n_threads = 1,
                                                   std::string_view rates_name = "rates") {
    if (cfg.iterations < 1) throw std::invalid_argument("run_iterations: iterations must be >= 1");
    if (n_threads < 1) n_threads = 1;
    const std::int64_t n = cfg.iterations;
    std::vector<IterationResult> results(static_cast<std::size_t>(n));

    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                StreamSet streams = iteration_streams(cfg.seed, static_cast<std::uint64_t>(i),
                                                      rates_name, cfg.credit_model);
                results[static_cast<std::size_t>(i)] = run_iteration(deal, mp, cfg, streams);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

struct SeriesSummary {
    std::string name;
    double mean = 0.0;
    double stddev = 0.0;
    Histogram histogram;
};

struct SimulationSummary {
    std::vector<SeriesSummary> series;  // one per tranche plus "total"
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;
    std::string model;
    bool degenerate_std = false;  // fewer than 2 iterations: stddev reported as 0
};

inline std::string credit_model_name(CreditModelKind kind) {
    return kind == CreditModelKind::BaselOneFactor ? "basel" : "copula";
}

inline SimulationSummary summarize(const std::vector<IterationResult>& results,
                                   const DealSpec& deal, const SimulationConfig& cfg) {
    if (results.empty()) throw std::invalid_argument("summarize: no iterations");
    SimulationSummary out;
    out.iterations = static_cast<std::int64_t>(results.size());
    out.seed = cfg.seed;
    out.model = credit_model_name(cfg.credit_model);

    const std::size_t n_tranches = deal.tranches.size();
    std::vector<double> values(results.size());
    for (std::size_t s = 0; s <= n_tranches; ++s) {
        SeriesSummary series;
        series.name = s < n_tranches ? deal.tranches[s].name : "total";
        for (std::size_t i = 0; i < results.size(); ++i)
            values[i] = s < n_tranches ? results[i].tranche_values[s] : results[i].total_value;
        const MeanStd ms = mean_std(values);
        series.mean = ms.mean;
        series.stddev = ms.stddev;
        out.degenerate_std = out.degenerate_std || ms.degenerate;
        series.histogram = build_histogram(values);
        out.series.push_back(std::move(series));
    }
    return out;
}

inline SimulationSummary run_simulation(const DealSpec& deal, const ModelParams& mp,
                                        const SimulationConfig& cfg, int n_threads = 1) {
    return summarize(run_iterations(deal, mp, cfg, n_threads), deal, cfg);
}

struct ComparisonReport {
    std::vector<std::string> series_names;  // tranches plus "total"
    std::vector<double> mean_basel;
    std::vector<double> mean_copula;
    double mean_difference = 0.0;  // basel total mean minus copula total mean
    double t_statistic = 0.0;
    double p_value = 1.0;
    bool reject_at_99 = false;
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;
    bool crn = true;
};

// Paired t-test on the per-iteration total-value differences of two runs
// that used identical iteration indexing (and, under CRN, identical rate
// streams, so prepayment incentives coincide and the difference isolates
// the credit model).
inline ComparisonReport compare_results(const DealSpec& deal,
                                        const std::vector<IterationResult>& basel,
                                        const std::vector<IterationResult>& copula,
                                        const SimulationConfig& cfg) {
    if (basel.size() != copula.size() || basel.empty())
        throw std::invalid_argument("compare_results: mismatched or empty result sets");

    ComparisonReport report;
    report.iterations = static_cast<std::int64_t>(basel.size());
    report.seed = cfg.seed;
    report.crn = cfg.crn;

    const std::size_t n_tranches = deal.tranches.size();
    for (std::size_t s = 0; s <= n_tranches; ++s) {
        report.series_names.push_back(s < n_tranches ? deal.tranches[s].name : "total");
        double mb = 0.0;
        double mc = 0.0;
        for (std::size_t i = 0; i < basel.size(); ++i) {
            mb += s < n_tranches ? basel[i].tranche_values[s] : basel[i].total_value;
            mc += s < n_tranches ? copula[i].tranche_values[s] : copula[i].total_value;
        }
        report.mean_basel.push_back(mb / static_cast<double>(basel.size()));
        report.mean_copula.push_back(mc / static_cast<double>(copula.size()));
    }
    report.mean_difference = report.mean_basel.back() - report.mean_copula.back();

    std::vector<double> diffs(basel.size());
    for (std::size_t i = 0; i < basel.size(); ++i)
        diffs[i] = basel[i].total_value - copula[i].total_value;
    const MeanStd d = mean_std(diffs);
    if (diffs.size() >= 2 && d.stddev > 0.0) {
        report.t_statistic = d.mean / (d.stddev / std::sqrt(static_cast<double>(diffs.size())));
        report.p_value =
            student_t_two_sided_p(report.t_statistic, static_cast<double>(diffs.size() - 1));
    } else {
        report.t_statistic = 0.0;
        report.p_value = 1.0;
    }
    report.reject_at_99 = report.p_value < 0.01;
    return report;
}

// The stream name carrying the short-rate draws for one leg of a
// comparison: shared under CRN, per-model otherwise.
inline std::string comparison_rates_name(bool crn, CreditModelKind kind) {
    if (crn) return "rates";
    return kind == CreditModelKind::BaselOneFactor ? "rates.basel" : "rates.copula";
}

inline ComparisonReport compare_models(const DealSpec& deal, const ModelParams& mp,
                                       const SimulationConfig& cfg, int n_threads = 1) {
    SimulationConfig basel_cfg = cfg;
    basel_cfg.credit_model = CreditModelKind::BaselOneFactor;
    SimulationConfig copula_cfg = cfg;
    copula_cfg.credit_model = CreditModelKind::GaussianCopula;
    const auto basel = run_iterations(deal, mp, basel_cfg, n_threads,
                                      comparison_rates_name(cfg.crn, basel_cfg.credit_model));
    const auto copula = run_iterations(deal, mp, copula_cfg, n_threads,
                                       comparison_rates_name(cfg.crn, copula_cfg.credit_model));
    return compare_results(deal, basel, copula, cfg);
}

} // namespace cmosim
