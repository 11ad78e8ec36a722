#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cmosim/deal.hpp"
#include "cmosim/rng.hpp"

namespace cmosim {

// Per-month rate realizations for one iteration. Index i holds the rates
// for month i+1; both vectors have length WAM.
struct RatePath {
    std::vector<double> short_rate; // r(t)
    std::vector<double> long_rate;  // R(t,T) observed at the start of month t
};

// Euler discretization of dr = a(b-r)dt + sigma*sqrt(r)dz at dt = 1/12,
// truncating the rate at zero after each step. Consumes exactly wam draws
// from the normal source.
template <class NormalSource>
inline std::vector<double> simulate_short_path(const CirParams& cir, int wam,
                                               NormalSource&& next_normal) {
    if (wam < 1) throw std::invalid_argument("simulate_short_path: wam must be >= 1");
    constexpr double dt = 1.0 / 12.0;
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> path(static_cast<std::size_t>(wam));
    double r = cir.r0;
    for (int t = 0; t < wam; ++t) {
        const double z = next_normal();
        r += cir.a * (cir.b - r) * dt + cir.sigma * std::sqrt(std::max(r, 0.0)) * sqrt_dt * z;
        if (r < 0.0) r = 0.0;
        path[static_cast<std::size_t>(t)] = r;
    }
    return path;
}

inline std::vector<double> simulate_short_path(const CirParams& cir, int wam, RandomStream& s) {
    return simulate_short_path(cir, wam, [&s] { return s.next_normal(); });
}

// CIR closed-form long rate R = (-ln A + B r)/tau with
//   gamma = sqrt(c^2 + 2 sigma^2),  c = gamma_a_const
//   B     = 2(e^{gamma tau} - 1) / ((gamma + c)(e^{gamma tau} - 1) + 2 gamma)
//   A     = B^{ab_exponent}
// tau_years is the time to the long-rate maturity and must be positive.
inline double long_rate(double r_t, double tau_years, const CirParams& cir,
                        const RichardRollParams& rr) {
    if (!(tau_years > 0.0)) throw std::domain_error("long_rate: T - t must be positive");
    const double c = rr.gamma_a_const;
    const double gamma = std::sqrt(c * c + 2.0 * cir.sigma * cir.sigma);
    const double em1 = std::expm1(gamma * tau_years);
    const double b_factor = 2.0 * em1 / ((gamma + c) * em1 + 2.0 * gamma);
    const double ln_a = rr.ab_exponent * std::log(b_factor);
    return (-ln_a + b_factor * r_t) / tau_years;
}

// Months are timed at their start: month t sits at (t-1)/12 years, so the
// final month of a path with cir.horizon_T = wam/12 still has tau > 0.
inline double month_tau_years(int month, const CirParams& cir) {
    return cir.horizon_T - static_cast<double>(month - 1) / 12.0;
}

template <class NormalSource>
inline RatePath simulate_rate_path(const CirParams& cir, const RichardRollParams& rr, int wam,
                                   NormalSource&& next_normal) {
    RatePath p;
    p.short_rate = simulate_short_path(cir, wam, std::forward<NormalSource>(next_normal));
    p.long_rate.resize(p.short_rate.size());
    for (int t = 1; t <= wam; ++t)
        p.long_rate[static_cast<std::size_t>(t - 1)] =
            long_rate(p.short_rate[static_cast<std::size_t>(t - 1)], month_tau_years(t, cir), cir, rr);
    return p;
}

inline RatePath simulate_rate_path(const CirParams& cir, const RichardRollParams& rr, int wam,
                                   RandomStream& s) {
    return simulate_rate_path(cir, rr, wam, [&s] { return s.next_normal(); });
}

} // namespace cmosim
