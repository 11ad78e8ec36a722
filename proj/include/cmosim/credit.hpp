#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cmosim/deal.hpp"
#include "cmosim/normal.hpp"
#include "cmosim/rng.hpp"

namespace cmosim {

// One-factor model parameters. k caches the default threshold, the
// standard-normal quantile of the per-period default probability.
struct OneFactorParams {
    double rho = 0.0;
    double p = 0.0;
    double k = 0.0;
};

inline OneFactorParams one_factor_params(double rho, double p) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("one_factor_params: rho out of (0,1)");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("one_factor_params: p out of (0,1)");
    return {rho, p, norm_quantile(p)};
}

// Per-period default probability under the configured convention. The
// annualized rate converts like CPR to SMM: 1 - (1-p)^(1/12).
inline double monthly_default_probability(double rate, DefaultRateConvention convention) {
    if (!(rate > 0.0 && rate < 1.0))
        throw std::domain_error("monthly_default_probability: rate out of (0,1)");
    if (convention == DefaultRateConvention::Monthly) return rate;
    return 1.0 - std::pow(1.0 - rate, 1.0 / 12.0);
}

inline double monthly_default_probability(const ModelParams& mp) {
    return monthly_default_probability(mp.annual_default_rate, mp.default_rate_convention);
}

// Limit distribution of the default fraction X of an asymptotically large
// pool: P(X < x) = Phi((sqrt(1-rho) Phi^-1(x) - k) / sqrt(rho)).
inline double vasicek_cdf(double x, const OneFactorParams& params) {
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("vasicek_cdf: x outside (0,1)");
    return norm_cdf((std::sqrt(1.0 - params.rho) * norm_quantile(x) - params.k) /
                    std::sqrt(params.rho));
}

// Inverse-transform sampler for the same distribution:
// x = Phi((sqrt(rho) Phi^-1(u) + k) / sqrt(1-rho)), strictly increasing in u.
inline double sample_default_fraction(double u, const OneFactorParams& params) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("sample_default_fraction: u outside (0,1)");
    return norm_cdf((std::sqrt(params.rho) * norm_quantile(u) + params.k) /
                    std::sqrt(1.0 - params.rho));
}

// Stressed default probability at the given confidence level. Identical to
// sampling the default-fraction distribution at u = confidence.
inline double basel_capital(double p, double rho, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::domain_error("basel_capital: confidence out of (0,1)");
    return sample_default_fraction(confidence, one_factor_params(rho, p));
}

// Default probability of one obligor conditional on the systematic factor y.
inline double conditional_default_probability(double y, const OneFactorParams& params) {
    return norm_cdf((params.k - std::sqrt(params.rho) * y) / std::sqrt(1.0 - params.rho));
}

namespace detail {

// 16-point Gauss-Legendre rule on [-1,1] (positive half; nodes are symmetric).
constexpr std::array<double, 8> gl16_x = {
    0.095012509837637454, 0.28160355077925892, 0.45801677765722737, 0.61787624440264377,
    0.755404408355003,    0.86563120238783176, 0.9445750230732326,  0.98940093499164994};
constexpr std::array<double, 8> gl16_w = {
    0.18945061045506859,  0.18260341504492361, 0.16915651939500262, 0.14959598881657676,
    0.12462897125553403,  0.095158511682492591, 0.062253523938647706, 0.027152459411754037};

struct MixtureNode {
    double weight;  // quadrature weight times the standard normal density
    double log_p;   // log conditional default probability
    double log_q;   // log conditional survival probability
};

// Fixed panel quadrature over the systematic factor. Sharing one grid
// across all n makes the pmf sum telescope to the quadrature of the normal
// density itself, so the distribution sums to 1 to near machine precision.
inline std::vector<MixtureNode> mixture_nodes(const OneFactorParams& params) {
    constexpr double y_max = 8.5;
    constexpr int panels = 340;
    const double h = 2.0 * y_max / panels;
    std::vector<MixtureNode> nodes;
    nodes.reserve(static_cast<std::size_t>(panels) * 16);
    const double sq_rho = std::sqrt(params.rho);
    const double sq_1mrho = std::sqrt(1.0 - params.rho);
    for (int i = 0; i < panels; ++i) {
        const double mid = -y_max + (i + 0.5) * h;
        for (int j = 0; j < 16; ++j) {
            const double xj = j < 8 ? -gl16_x[static_cast<std::size_t>(7 - j)]
                                    : gl16_x[static_cast<std::size_t>(j - 8)];
            const double wj = j < 8 ? gl16_w[static_cast<std::size_t>(7 - j)]
                                    : gl16_w[static_cast<std::size_t>(j - 8)];
            const double y = mid + 0.5 * h * xj;
            const double z = (params.k - sq_rho * y) / sq_1mrho;
            nodes.push_back({0.5 * h * wj * norm_pdf(y), std::log(norm_cdf(z)),
                             std::log(norm_cdf(-z))});
        }
    }
    return nodes;
}

inline double mixture_pmf_term(const std::vector<MixtureNode>& nodes, int n, int total,
                               double log_choose) {
    double acc = 0.0;
    for (const auto& node : nodes) {
        double e = log_choose;
        if (n > 0) e += n * node.log_p;
        if (total - n > 0) e += (total - n) * node.log_q;
        acc += node.weight * std::exp(e);
    }
    return acc;
}

} // namespace detail

// Probability of exactly n defaults among N obligors: the binomial mixed
// over the systematic factor, integrated numerically.
inline double finite_pool_default_pmf(int n, int n_loans, const OneFactorParams& params) {
    if (n_loans < 1) throw std::invalid_argument("finite_pool_default_pmf: N must be >= 1");
    if (n < 0 || n > n_loans) throw std::invalid_argument("finite_pool_default_pmf: n outside [0,N]");
    const auto nodes = detail::mixture_nodes(params);
    const double log_choose = std::lgamma(n_loans + 1.0) - std::lgamma(n + 1.0) -
                              std::lgamma(n_loans - n + 1.0);
    return detail::mixture_pmf_term(nodes, n, n_loans, log_choose);
}

// Full pmf over n = 0..N sharing one quadrature grid.
inline std::vector<double> finite_pool_default_distribution(int n_loans,
                                                            const OneFactorParams& params) {
    if (n_loans < 1) throw std::invalid_argument("finite_pool_default_distribution: N must be >= 1");
    const auto nodes = detail::mixture_nodes(params);
    std::vector<double> pmf(static_cast<std::size_t>(n_loans) + 1);
    for (int n = 0; n <= n_loans; ++n) {
        const double log_choose = std::lgamma(n_loans + 1.0) - std::lgamma(n + 1.0) -
                                  std::lgamma(n_loans - n + 1.0);
        pmf[static_cast<std::size_t>(n)] = detail::mixture_pmf_term(nodes, n, n_loans, log_choose);
    }
    return pmf;
}

// Copula pool: default times of a finite set of representative loans,
// coupled through one systematic factor per iteration. default_month is
// 1-based; 0 means the loan never defaults within the horizon.
struct CopulaPoolState {
    int n_loans = 0;
    std::vector<int> default_month;
    std::vector<double> alive_fraction;  // surviving count fraction after each month
};

// Li-style one-factor Gaussian copula on default times. Latent variable
// Z_i = sqrt(rho) Y + sqrt(1-rho) eps_i; loan i defaults in the first month
// t with Phi(Z_i) <= CumDefault(t), where the cumulative default curve
// comes from the per-month probabilities in monthly_p.
template <class NormalSource>
inline CopulaPoolState simulate_copula_pool(const OneFactorParams& params, int n_loans,
                                            const std::vector<double>& monthly_p,
                                            NormalSource&& next_normal) {
    if (n_loans < 1) throw std::invalid_argument("simulate_copula_pool: n_loans must be >= 1");
    if (monthly_p.empty()) throw std::invalid_argument("simulate_copula_pool: empty default curve");
    const int wam = static_cast<int>(monthly_p.size());

    std::vector<double> cumulative(monthly_p.size());
    double survival = 1.0;
    for (std::size_t t = 0; t < monthly_p.size(); ++t) {
        if (!(monthly_p[t] > 0.0 && monthly_p[t] < 1.0))
            throw std::domain_error("simulate_copula_pool: default curve values must be in (0,1)");
        survival *= 1.0 - monthly_p[t];
        cumulative[t] = 1.0 - survival;
    }

    CopulaPoolState state;
    state.n_loans = n_loans;
    state.default_month.resize(static_cast<std::size_t>(n_loans), 0);
    std::vector<int> defaults_in_month(static_cast<std::size_t>(wam) + 1, 0);

    const double sq_rho = std::sqrt(params.rho);
    const double sq_1mrho = std::sqrt(1.0 - params.rho);
    const double y = next_normal();
    for (int i = 0; i < n_loans; ++i) {
        const double z = sq_rho * y + sq_1mrho * next_normal();
        const double u = norm_cdf(z);
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        if (it != cumulative.end()) {
            const int month = static_cast<int>(it - cumulative.begin()) + 1;
            state.default_month[static_cast<std::size_t>(i)] = month;
            ++defaults_in_month[static_cast<std::size_t>(month)];
        }
    }

    state.alive_fraction.resize(static_cast<std::size_t>(wam));
    int alive = n_loans;
    for (int t = 1; t <= wam; ++t) {
        alive -= defaults_in_month[static_cast<std::size_t>(t)];
        state.alive_fraction[static_cast<std::size_t>(t - 1)] =
            static_cast<double>(alive) / static_cast<double>(n_loans);
    }
    return state;
}

inline CopulaPoolState simulate_copula_pool(const OneFactorParams& params, int n_loans,
                                            const std::vector<double>& monthly_p, RandomStream& s) {
    return simulate_copula_pool(params, n_loans, monthly_p, [&s] { return s.next_normal(); });
}

// Per-month default fraction of the surviving pool implied by a copula
// state; this is the x fed to the cash-flow recursion in copula mode.
inline std::vector<double> monthly_default_fractions(const CopulaPoolState& state) {
    std::vector<double> x(state.alive_fraction.size());
    double prev = 1.0;
    for (std::size_t t = 0; t < state.alive_fraction.size(); ++t) {
        const double cur = state.alive_fraction[t];
        x[t] = prev > 0.0 ? (prev - cur) / prev : 0.0;
        prev = cur;
    }
    return x;
}

} // namespace cmosim
