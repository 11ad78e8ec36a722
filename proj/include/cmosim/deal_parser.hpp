#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cmosim/deal.hpp"

namespace cmosim {

// Syntax problem in a deal-spec file; carries the 1-based line number.
struct parse_error : std::runtime_error {
    int line;
    parse_error(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Semantic problem: the parsed values violate a deal or model invariant.
struct spec_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParsedDeal {
    DealSpec deal;
    ModelParams params;
    SimulationConfig config;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view v, int line, std::string_view key) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw parse_error(line, "invalid number '" + std::string(v) + "' for " + std::string(key));
    return out;
}

inline std::int64_t parse_int(std::string_view v, int line, std::string_view key) {
    std::int64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw parse_error(line, "invalid integer '" + std::string(v) + "' for " + std::string(key));
    return out;
}

inline std::uint64_t parse_uint(std::string_view v, int line, std::string_view key) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw parse_error(line, "invalid unsigned integer '" + std::string(v) + "' for " + std::string(key));
    return out;
}

inline bool parse_bool(std::string_view v, int line, std::string_view key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw parse_error(line, "expected true or false for " + std::string(key));
}

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

// Accumulates raw key assignments from a file or from --set overrides, then
// resolves the documented defaults and validates. Dependent defaults
// (cir.b follows cir.r0, cir.T follows wam) are resolved only at build(),
// so an override is indistinguishable from editing the file.
class DealSpecBuilder {
public:
    // section in {"pool","model","simulation"}; key is the in-section key
    // (possibly dotted, e.g. "cir.a"). line is used for error reporting;
    // pass 0 for programmatic assignment.
    void assign(std::string_view section, std::string_view key, std::string_view value, int line = 0) {
        using namespace detail;
        if (section == "pool") {
            if (key == "balance") pool_balance_ = parse_double(value, line, key);
            else if (key == "wac") wac_ = parse_double(value, line, key);
            else if (key == "wam") wam_ = static_cast<int>(parse_int(value, line, key));
            else throw parse_error(line, "unknown key '" + std::string(key) + "' in [pool]");
        } else if (section == "model") {
            if (key == "rho") rho_ = parse_double(value, line, key);
            else if (key == "default_rate") default_rate_ = parse_double(value, line, key);
            else if (key == "default_rate_convention") {
                if (value == "annualized") convention_ = DefaultRateConvention::Annualized;
                else if (value == "monthly") convention_ = DefaultRateConvention::Monthly;
                else throw parse_error(line, "default_rate_convention must be annualized or monthly");
            } else if (key == "cir.a") cir_a_ = parse_double(value, line, key);
            else if (key == "cir.b") cir_b_ = parse_double(value, line, key);
            else if (key == "cir.sigma") cir_sigma_ = parse_double(value, line, key);
            else if (key == "cir.r0") cir_r0_ = parse_double(value, line, key);
            else if (key == "cir.T") cir_T_ = parse_double(value, line, key);
            else if (key == "price_convention") {
                if (value == "discounted") price_convention_ = PriceConvention::DiscountedAtShortRate;
                else if (value == "undiscounted") price_convention_ = PriceConvention::UndiscountedSum;
                else throw parse_error(line, "price_convention must be discounted or undiscounted");
            } else if (key == "recovery") recovery_ = parse_double(value, line, key);
            else throw parse_error(line, "unknown key '" + std::string(key) + "' in [model]");
        } else if (section == "simulation") {
            if (key == "iterations") iterations_ = parse_int(value, line, key);
            else if (key == "seed") seed_ = parse_uint(value, line, key);
            else if (key == "credit_model") {
                if (value == "basel") credit_model_ = CreditModelKind::BaselOneFactor;
                else if (value == "copula") credit_model_ = CreditModelKind::GaussianCopula;
                else throw parse_error(line, "credit_model must be basel or copula");
            } else if (key == "copula_loans") copula_loans_ = static_cast<int>(parse_int(value, line, key));
            else if (key == "crn") crn_ = parse_bool(value, line, key);
            else throw parse_error(line, "unknown key '" + std::string(key) + "' in [simulation]");
        } else {
            throw parse_error(line, "unknown section [" + std::string(section) + "]");
        }
    }

    void add_tranche(std::string name, double balance) {
        tranches_.push_back({std::move(name), balance});
    }

    // Dotted override key, e.g. "model.cir.a" or "simulation.iterations".
    void apply_override(std::string_view key, std::string_view value) {
        const auto dot = key.find('.');
        if (dot == std::string_view::npos)
            throw parse_error(0, "override key '" + std::string(key) + "' has no section prefix");
        assign(key.substr(0, dot), key.substr(dot + 1), detail::trim(value));
    }

    // Resolves defaults without running the semantic checks; build() is the
    // validating entry point.
    ParsedDeal build_unchecked() const {
        ParsedDeal out;
        if (!pool_balance_) throw spec_error("missing [pool] balance");
        out.deal.pool_balance = *pool_balance_;
        out.deal.wac = wac_.value_or(0.08);
        out.deal.wam = wam_.value_or(360);
        out.deal.tranches = tranches_;
        if (out.deal.tranches.empty()) throw spec_error("no tranches defined");

        out.params.rho = rho_.value_or(0.15);
        out.params.annual_default_rate = default_rate_.value_or(0.05);
        out.params.default_rate_convention = convention_.value_or(DefaultRateConvention::Annualized);
        out.params.price_convention = price_convention_.value_or(PriceConvention::DiscountedAtShortRate);
        out.params.recovery_rate = recovery_.value_or(0.0);
        out.params.cir.a = cir_a_.value_or(0.2);
        out.params.cir.r0 = cir_r0_.value_or(0.05);
        out.params.cir.b = cir_b_.value_or(out.params.cir.r0);
        out.params.cir.sigma = cir_sigma_.value_or(0.1);
        out.params.cir.horizon_T = cir_T_.value_or(static_cast<double>(out.deal.wam) / 12.0);

        out.config.iterations = iterations_.value_or(10000);
        out.config.seed = seed_.value_or(1);
        out.config.credit_model = credit_model_.value_or(CreditModelKind::BaselOneFactor);
        out.config.copula_loans = copula_loans_.value_or(1000);
        out.config.crn = crn_.value_or(true);
        return out;
    }

    ParsedDeal build() const {
        ParsedDeal out = build_unchecked();
        std::string errors;
        for (const auto& v : validate(out.deal, out.params, out.config))
            if (v.severity == Severity::Error) {
                if (!errors.empty()) errors += "; ";
                errors += v.message;
            }
        if (!errors.empty()) throw spec_error(errors);
        return out;
    }

private:
    std::optional<double> pool_balance_, wac_;
    std::optional<int> wam_;
    std::vector<TrancheSpec> tranches_;
    std::optional<double> rho_, default_rate_, recovery_;
    std::optional<DefaultRateConvention> convention_;
    std::optional<PriceConvention> price_convention_;
    std::optional<double> cir_a_, cir_b_, cir_sigma_, cir_r0_, cir_T_;
    std::optional<std::int64_t> iterations_;
    std::optional<std::uint64_t> seed_;
    std::optional<CreditModelKind> credit_model_;
    std::optional<int> copula_loans_;
    std::optional<bool> crn_;
};

// Reads the line-oriented deal-spec format into a builder without resolving
// defaults. Sections: [pool], [tranches], [model], [simulation]. Lines
// beginning with '#' are comments; [tranches] lines are "name balance"
// pairs in priority order, all other sections use key=value.
inline DealSpecBuilder parse_deal_spec_raw(std::istream& in) {
    DealSpecBuilder b;
    std::string section;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw parse_error(line_no, "unterminated section header");
            section = std::string(line.substr(1, line.size() - 2));
            if (section != "pool" && section != "tranches" && section != "model" &&
                section != "simulation")
                throw parse_error(line_no, "unknown section [" + section + "]");
            continue;
        }
        if (section.empty()) throw parse_error(line_no, "content before any section header");
        if (section == "tranches") {
            const auto sp = line.find_first_of(" \t");
            if (sp == std::string_view::npos)
                throw parse_error(line_no, "expected 'name balance' pair");
            const std::string_view name = detail::trim(line.substr(0, sp));
            const std::string_view bal = detail::trim(line.substr(sp + 1));
            b.add_tranche(std::string(name), detail::parse_double(bal, line_no, "tranche balance"));
        } else {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw parse_error(line_no, "expected key=value");
            b.assign(section, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)),
                     line_no);
        }
    }
    return b;
}

inline ParsedDeal parse_deal_spec(std::istream& in) { return parse_deal_spec_raw(in).build(); }

inline ParsedDeal parse_deal_spec(const std::string& text) {
    std::istringstream in(text);
    return parse_deal_spec(in);
}

// Parse, apply "section.key=value" overrides, then resolve and validate.
inline ParsedDeal parse_deal_spec(std::istream& in, const std::vector<std::string>& overrides) {
    DealSpecBuilder b = parse_deal_spec_raw(in);
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw parse_error(0, "override '" + ov + "' is not of the form key=value");
        b.apply_override(detail::trim(std::string_view(ov).substr(0, eq)),
                         std::string_view(ov).substr(eq + 1));
    }
    return b.build();
}

// Canonical serialization; doubles are written in shortest round-trip form,
// so parse(serialize(d)) reproduces d field for field.
inline std::string serialize_deal_spec(const ParsedDeal& d) {
    using detail::format_double;
    std::ostringstream out;
    out << "[pool]\n";
    out << "balance=" << format_double(d.deal.pool_balance) << "\n";
    out << "wac=" << format_double(d.deal.wac) << "\n";
    out << "wam=" << d.deal.wam << "\n";
    out << "\n[tranches]\n";
    for (const auto& t : d.deal.tranches)
        out << t.name << " " << format_double(t.balance) << "\n";
    out << "\n[model]\n";
    out << "rho=" << format_double(d.params.rho) << "\n";
    out << "default_rate=" << format_double(d.params.annual_default_rate) << "\n";
    out << "default_rate_convention="
        << (d.params.default_rate_convention == DefaultRateConvention::Annualized ? "annualized"
                                                                                  : "monthly")
        << "\n";
    out << "cir.a=" << format_double(d.params.cir.a) << "\n";
    out << "cir.b=" << format_double(d.params.cir.b) << "\n";
    out << "cir.sigma=" << format_double(d.params.cir.sigma) << "\n";
    out << "cir.r0=" << format_double(d.params.cir.r0) << "\n";
    out << "cir.T=" << format_double(d.params.cir.horizon_T) << "\n";
    out << "price_convention="
        << (d.params.price_convention == PriceConvention::DiscountedAtShortRate ? "discounted"
                                                                                : "undiscounted")
        << "\n";
    out << "recovery=" << format_double(d.params.recovery_rate) << "\n";
    out << "\n[simulation]\n";
    out << "iterations=" << d.config.iterations << "\n";
    out << "seed=" << d.config.seed << "\n";
    out << "credit_model="
        << (d.config.credit_model == CreditModelKind::BaselOneFactor ? "basel" : "copula") << "\n";
    out << "copula_loans=" << d.config.copula_loans << "\n";
    out << "crn=" << (d.config.crn ? "true" : "false") << "\n";
    return out.str();
}

} // namespace cmosim
