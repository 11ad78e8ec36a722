#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmosim/deal.hpp"

namespace cmosim {

// PSA baseline: CPR ramps by 0.2% per month to 6% at month 30 and stays
// there for the remaining life of the pool.
inline double psa_cpr(int month, double psa_multiple = 1.0) {
    if (month < 1) throw std::invalid_argument("psa_cpr: month must be >= 1");
    return psa_multiple * 0.002 * static_cast<double>(std::min(month, 30));
}

// Single monthly mortality implied by an annual CPR.
inline double smm(double cpr) {
    if (!(cpr >= 0.0 && cpr <= 1.0)) throw std::domain_error("smm: CPR outside [0,1]");
    return 1.0 - std::pow(1.0 - cpr, 1.0 / 12.0);
}

// Pool balances feeding the burnout factor. current_balance is the
// pre-default balance at the start of the month.
struct PrepayState {
    double initial_balance = 0.0;
    double current_balance = 0.0;
};

// Richard-Roll CPR: product of refinancing incentive, seasoning ramp,
// calendar-month multiplier and burnout, clamped to [0,1] (the raw product
// has no analytic upper bound of 1).
inline double richard_roll_cpr(int month, double wac, double long_rate, const PrepayState& state,
                               const RichardRollParams& rr) {
    if (month < 1) throw std::invalid_argument("richard_roll_cpr: month must be >= 1");
    const double ri = rr.ri_base + rr.ri_scale * std::atan(rr.ri_shift + rr.ri_gain * (wac - long_rate));
    const double age = std::min(1.0, static_cast<double>(month) / static_cast<double>(rr.seasoning_months));
    // Deal month 1 maps to the first table entry, cycling yearly; mm_offset
    // rotates the alignment.
    const int idx = ((month - 1 + rr.mm_offset) % 12 + 12) % 12;
    const double mm = rr.monthly_multiplier[static_cast<std::size_t>(idx)];
    const double bm = rr.burnout_floor + rr.burnout_slope * (state.current_balance / state.initial_balance);
    return std::clamp(ri * age * mm * bm, 0.0, 1.0);
}

} // namespace cmosim
