#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace cmosim {

struct TrancheSpec {
    std::string name;
    double balance = 0.0;
};

enum class PrincipalRule { SequentialPay };
enum class InterestRule { ProRataByBalance };

// One deal: the collateral pool and the tranche stack, in priority order
// (index 0 is the most senior tranche and receives principal first).
struct DealSpec {
    double pool_balance = 0.0;
    double wac = 0.08;   // annual coupon, decimal fraction
    int wam = 360;       // remaining term, months
    std::vector<TrancheSpec> tranches;
    PrincipalRule principal_rule = PrincipalRule::SequentialPay;
    InterestRule interest_rule = InterestRule::ProRataByBalance;
};

struct CirParams {
    double a = 0.2;          // mean-reversion speed, 1/year
    double b = 0.05;         // long-run level
    double sigma = 0.1;      // volatility, 1/sqrt(year)
    double r0 = 0.05;        // initial short rate
    double horizon_T = 30.0; // maturity of the long rate, years
};

struct RichardRollParams {
    double ri_base = 0.28;
    double ri_scale = 0.14;
    double ri_shift = -8.571;
    double ri_gain = 430.0;
    int seasoning_months = 30;
    std::array<double, 12> monthly_multiplier{0.94, 0.76, 0.74, 0.95, 0.98, 0.92,
                                              0.98, 1.10, 1.18, 1.22, 1.23, 0.98};
    int mm_offset = 0;  // rotates deal month 1 within the calendar-year table
    double burnout_floor = 0.3;
    double burnout_slope = 0.7;
    double gamma_a_const = 0.28;  // reversion constant inside gamma and B(t,T)
    double ab_exponent = 0.0784;  // exponent turning B(t,T) into A(t,T)
};

enum class DefaultRateConvention { Annualized, Monthly };
enum class PriceConvention { DiscountedAtShortRate, UndiscountedSum };

// Prepayment model driving CPR(t). Selected programmatically (it is not a
// deal-file key); None exists so oracle configurations can switch
// prepayment off entirely.
enum class PrepayModel { RichardRoll, Psa, None };

struct ModelParams {
    double rho = 0.15;                 // asset correlation
    double annual_default_rate = 0.05; // portfolio default rate, see convention
    DefaultRateConvention default_rate_convention = DefaultRateConvention::Annualized;
    double confidence = 0.999;         // capital-requirement confidence level
    CirParams cir;
    RichardRollParams rr;
    PriceConvention price_convention = PriceConvention::DiscountedAtShortRate;
    double recovery_rate = 0.0;        // cash recovered per unit of defaulted balance
    PrepayModel prepay_model = PrepayModel::RichardRoll;
    double psa_multiple = 1.0;         // used when prepay_model == Psa
};

enum class CreditModelKind { BaselOneFactor, GaussianCopula };

struct SimulationConfig {
    std::int64_t iterations = 10000;
    std::uint64_t seed = 1;
    CreditModelKind credit_model = CreditModelKind::BaselOneFactor;
    int copula_loans = 1000;  // representative loans in copula mode
    bool crn = true;          // share rate streams across compared models
    // Reuse one systematic credit factor for the whole iteration instead of
    // drawing a fresh one each month (sensitivity option, Basel mode only).
    bool persistent_factor = false;
};

enum class Severity { Warning, Error };

struct Violation {
    Severity severity = Severity::Error;
    std::string message;
};

inline bool has_errors(const std::vector<Violation>& vs) {
    for (const auto& v : vs)
        if (v.severity == Severity::Error) return true;
    return false;
}

// Checks every type invariant. Violations are returned as data; the Feller
// condition and an unpriceable long-rate horizon are warnings, everything
// else is an error.
inline std::vector<Violation> validate(const DealSpec& deal, const ModelParams& mp) {
    std::vector<Violation> out;
    auto error = [&](std::string msg) { out.push_back({Severity::Error, std::move(msg)}); };
    auto warning = [&](std::string msg) { out.push_back({Severity::Warning, std::move(msg)}); };

    if (!(deal.pool_balance > 0.0)) error("pool balance must be positive");
    if (deal.wam < 1) error("wam must be at least 1 month");
    if (!(deal.wac > 0.0 && deal.wac < 1.0)) error("wac out of (0,1)");
    if (deal.tranches.empty()) error("deal has no tranches");

    std::set<std::string> names;
    double tranche_sum = 0.0;
    for (const auto& t : deal.tranches) {
        if (!(t.balance > 0.0)) error("tranche '" + t.name + "' balance must be positive");
        if (!names.insert(t.name).second) error("duplicate tranche name '" + t.name + "'");
        tranche_sum += t.balance;
    }
    if (deal.pool_balance > 0.0 &&
        std::fabs(tranche_sum - deal.pool_balance) > 1e-9 * deal.pool_balance)
        error("tranche balances != pool balance");

    if (!(mp.rho > 0.0 && mp.rho < 1.0)) error("rho out of (0,1)");
    if (!(mp.annual_default_rate > 0.0 && mp.annual_default_rate < 1.0))
        error("default rate out of (0,1)");
    if (!(mp.recovery_rate >= 0.0 && mp.recovery_rate < 1.0)) error("recovery out of [0,1)");
    if (!(mp.confidence > 0.0 && mp.confidence < 1.0)) error("confidence out of (0,1)");
    if (!(mp.psa_multiple >= 0.0)) error("psa multiple must be non-negative");

    const CirParams& cir = mp.cir;
    if (!(cir.a > 0.0)) error("cir.a must be positive");
    if (!(cir.b > 0.0)) error("cir.b must be positive");
    if (!(cir.sigma >= 0.0)) error("cir.sigma must be non-negative");
    if (!(cir.r0 > 0.0)) error("cir.r0 must be positive");
    if (cir.a > 0.0 && cir.b > 0.0 && 2.0 * cir.a * cir.b < cir.sigma * cir.sigma)
        warning("Feller condition violated: 2*a*b < sigma^2, short rate can reach zero");
    // The long rate is observed at the start of each month; the last
    // observation time is (wam-1)/12 years and must precede cir.T.
    if (cir.horizon_T * 12.0 <= static_cast<double>(deal.wam - 1))
        warning("cir.T does not cover the WAM horizon; pricing will fail at the month where T-t <= 0");

    const RichardRollParams& rr = mp.rr;
    if (rr.seasoning_months < 1) error("seasoning months must be at least 1");
    for (double m : rr.monthly_multiplier)
        if (!(m > 0.0)) {
            error("monthly multiplier entries must be positive");
            break;
        }

    return out;
}

inline std::vector<Violation> validate(const DealSpec& deal, const ModelParams& mp,
                                       const SimulationConfig& cfg) {
    auto out = validate(deal, mp);
    if (cfg.iterations < 1) out.push_back({Severity::Error, "iterations must be at least 1"});
    if (cfg.copula_loans < 1) out.push_back({Severity::Error, "copula_loans must be at least 1"});
    return out;
}

} // namespace cmosim
