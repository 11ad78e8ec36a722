#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmosim/deal.hpp"

namespace cmosim {

// One month of pool cash flows. total = scheduled_principal + interest +
// prepayment + recovery_cash; balance_after_default = (1-x)*balance_start.
struct PoolCashFlow {
    int month = 0;
    double balance_start = 0.0;
    double defaulted = 0.0;
    double balance_after_default = 0.0;
    double scheduled_payment = 0.0;    // MP
    double interest = 0.0;             // IP
    double scheduled_principal = 0.0;  // SP
    double prepayment = 0.0;           // PP
    double recovery_cash = 0.0;
    double total = 0.0;                // CF
};

struct PoolStepResult {
    PoolCashFlow cf;
    double next_balance = 0.0;
};

// One month of the cash-flow recursion. Defaults are applied first, the
// scheduled payment is the level annuity over the remaining term
// (wam - month + 1), and the final month pays the balance off exactly.
inline PoolStepResult pool_step(double balance, int month, double wac, int wam, double x,
                                double smm, double recovery) {
    if (!(balance >= 0.0)) throw std::invalid_argument("pool_step: negative balance");
    if (!(wac > 0.0)) throw std::domain_error("pool_step: coupon must be positive");
    if (month < 1 || month > wam) throw std::invalid_argument("pool_step: month outside 1..wam");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("pool_step: default fraction outside [0,1]");
    if (!(smm >= 0.0 && smm <= 1.0)) throw std::domain_error("pool_step: smm outside [0,1]");
    if (!(recovery >= 0.0 && recovery < 1.0)) throw std::domain_error("pool_step: recovery outside [0,1)");

    const double c = wac / 12.0;
    PoolStepResult out;
    PoolCashFlow& cf = out.cf;
    cf.month = month;
    cf.balance_start = balance;
    cf.defaulted = x * balance;
    cf.balance_after_default = (1.0 - x) * balance;

    const double bprime = cf.balance_after_default;
    cf.interest = bprime * c;
    if (month == wam) {
        cf.scheduled_principal = bprime;
        cf.prepayment = 0.0;
    } else {
        const int remaining = wam - month + 1;
        const double mp = bprime * c / (1.0 - std::pow(1.0 + c, -static_cast<double>(remaining)));
        cf.scheduled_principal = mp - cf.interest;
        if (cf.scheduled_principal > bprime * (1.0 + 1e-12))
            throw std::runtime_error("pool_step: scheduled principal exceeds post-default balance");
        if (cf.scheduled_principal > bprime) cf.scheduled_principal = bprime;
        cf.prepayment = (bprime - cf.scheduled_principal) * smm;
    }
    cf.scheduled_payment = cf.scheduled_principal + cf.interest;
    cf.recovery_cash = recovery * cf.defaulted;
    cf.total = cf.scheduled_principal + cf.interest + cf.prepayment + cf.recovery_cash;
    out.next_balance = bprime - cf.scheduled_principal - cf.prepayment;
    if (out.next_balance < 0.0) out.next_balance = 0.0;
    return out;
}

struct TrancheState {
    std::string name;
    double balance = 0.0;
    double initial_balance = 0.0;
    double principal_received = 0.0;
    double interest_received = 0.0;
    bool retired = false;
};

inline std::vector<TrancheState> make_tranche_states(const DealSpec& deal) {
    std::vector<TrancheState> out;
    out.reserve(deal.tranches.size());
    for (const auto& t : deal.tranches) out.push_back({t.name, t.balance, t.balance, 0.0, 0.0, false});
    return out;
}

namespace detail {

// Balance reductions mix (1-x)*B and x*B terms whose rounding leaves ulp
// dust behind; snap it to an exact zero so retirement is unambiguous.
inline void settle_tranche(TrancheState& t) {
    if (t.balance <= t.initial_balance * 1e-12) {
        t.balance = 0.0;
        t.retired = true;
    }
}

} // namespace detail

struct TranchePayment {
    double principal = 0.0;
    double interest = 0.0;
};

struct DistributionResult {
    std::vector<TranchePayment> payments;
    // Principal cash left over after every tranche balance is filled;
    // zero whenever tranche balances track the pool correctly.
    double overcollateralization = 0.0;
};

// Distributes one month of pool cash: principal (scheduled + prepayment +
// recovery) sequentially down the priority stack, interest pro rata on the
// month-start tranche balances. Tranches are retired at zero balance.
inline DistributionResult distribute(const PoolCashFlow& cf, std::vector<TrancheState>& tranches,
                                     PrincipalRule principal_rule, InterestRule interest_rule) {
    DistributionResult out;
    out.payments.resize(tranches.size());

    double total_balance = 0.0;
    for (const auto& t : tranches) total_balance += t.balance;

    if (interest_rule == InterestRule::ProRataByBalance) {
        if (total_balance > 0.0) {
            for (std::size_t i = 0; i < tranches.size(); ++i) {
                const double share = cf.interest * (tranches[i].balance / total_balance);
                out.payments[i].interest = share;
                tranches[i].interest_received += share;
            }
        } else {
            out.overcollateralization += cf.interest;
        }
    }

    double principal = cf.scheduled_principal + cf.prepayment + cf.recovery_cash;
    if (principal_rule == PrincipalRule::SequentialPay) {
        for (std::size_t i = 0; i < tranches.size() && principal > 0.0; ++i) {
            TrancheState& t = tranches[i];
            const double pay = std::min(principal, t.balance);
            if (pay <= 0.0) continue;
            t.balance -= pay;
            t.principal_received += pay;
            principal -= pay;
            out.payments[i].principal = pay;
            detail::settle_tranche(t);
        }
    }
    out.overcollateralization += principal;
    return out;
}

// Writes defaulted principal off tranche balances from the most junior
// tranche upward, cascading when a tranche is wiped out.
inline void write_down_defaults(double amount, std::vector<TrancheState>& tranches) {
    if (!(amount >= 0.0)) throw std::invalid_argument("write_down_defaults: negative amount");
    for (auto it = tranches.rbegin(); it != tranches.rend() && amount > 0.0; ++it) {
        const double wd = std::min(amount, it->balance);
        it->balance -= wd;
        amount -= wd;
        detail::settle_tranche(*it);
    }
}

} // namespace cmosim
