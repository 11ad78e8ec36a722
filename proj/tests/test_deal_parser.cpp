#include <gtest/gtest.h>

#include <string>

#include "cmosim/deal_parser.hpp"
#include "cmosim/rng.hpp"

using namespace cmosim;

namespace {

const std::string kExampleSpec = R"(# three-tranche sequential deal
[pool]
balance=1000
wac=0.08
wam=360

[tranches]
A 500
B 300
C 200

[model]
rho=0.15
default_rate=0.05
default_rate_convention=annualized
cir.a=0.2
cir.b=0.05
cir.sigma=0.1
cir.r0=0.05
cir.T=30
price_convention=discounted
recovery=0

[simulation]
iterations=10000
seed=42
credit_model=basel
copula_loans=1000
crn=true
)";

} // namespace

TEST(DealParser, ParsesThreeTrancheDeal) {
    const ParsedDeal d = parse_deal_spec(kExampleSpec);
    EXPECT_DOUBLE_EQ(d.deal.pool_balance, 1000.0);
    EXPECT_DOUBLE_EQ(d.deal.wac, 0.08);
    EXPECT_EQ(d.deal.wam, 360);
    ASSERT_EQ(d.deal.tranches.size(), 3u);
    EXPECT_EQ(d.deal.tranches[0].name, "A");
    EXPECT_DOUBLE_EQ(d.deal.tranches[0].balance, 500.0);
    EXPECT_EQ(d.deal.tranches[2].name, "C");
    EXPECT_EQ(d.deal.principal_rule, PrincipalRule::SequentialPay);
    EXPECT_EQ(d.deal.interest_rule, InterestRule::ProRataByBalance);
    EXPECT_DOUBLE_EQ(d.params.rho, 0.15);
    EXPECT_EQ(d.config.iterations, 10000);
    EXPECT_EQ(d.config.seed, 42u);
}

TEST(DealParser, SingleTranchePassThroughIsValid) {
    const ParsedDeal d = parse_deal_spec("[pool]\nbalance=1000\n[tranches]\nP 1000\n");
    ASSERT_EQ(d.deal.tranches.size(), 1u);
    EXPECT_DOUBLE_EQ(d.deal.tranches[0].balance, d.deal.pool_balance);
}

TEST(DealParser, TrancheSumMismatchIsSemanticError) {
    try {
        parse_deal_spec("[pool]\nbalance=1000\n[tranches]\nA 500\nB 300\nC 199\n");
        FAIL() << "expected spec_error";
    } catch (const spec_error& e) {
        EXPECT_NE(std::string(e.what()).find("tranche balances != pool balance"),
                  std::string::npos);
    }
}

TEST(DealParser, SyntaxErrorsCarryLineNumbers) {
    try {
        parse_deal_spec("[pool]\nbalance=1000\nnonsense line\n");
        FAIL() << "expected parse_error";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line, 3);
    }
    EXPECT_THROW(parse_deal_spec("[pool]\nbalance=abc\n"), parse_error);
    EXPECT_THROW(parse_deal_spec("[nope]\nx=1\n"), parse_error);
    EXPECT_THROW(parse_deal_spec("balance=1\n"), parse_error);
    EXPECT_THROW(parse_deal_spec("[pool]\nmystery=1\n"), parse_error);
}

TEST(DealParser, InvalidValuesAreRejected) {
    const std::string base = "[pool]\nbalance=1000\n[tranches]\nA 1000\n[model]\n";
    EXPECT_THROW(parse_deal_spec(base + "rho=1.2\n"), spec_error);
    EXPECT_THROW(parse_deal_spec(base + "default_rate=0\n"), spec_error);
    EXPECT_THROW(parse_deal_spec(base + "recovery=1.0\n"), spec_error);
    EXPECT_THROW(parse_deal_spec("[pool]\nbalance=-5\n[tranches]\nA -5\n"), spec_error);
    EXPECT_THROW(parse_deal_spec("[pool]\nbalance=1000\n[tranches]\nA 500\nA 500\n"), spec_error);
}

TEST(DealParser, DefaultsMatchDocumentedConstants) {
    const ParsedDeal d = parse_deal_spec("[pool]\nbalance=1000\n[tranches]\nP 1000\n");
    EXPECT_DOUBLE_EQ(d.deal.wac, 0.08);
    EXPECT_EQ(d.deal.wam, 360);
    EXPECT_DOUBLE_EQ(d.params.rho, 0.15);
    EXPECT_DOUBLE_EQ(d.params.annual_default_rate, 0.05);
    EXPECT_EQ(d.params.default_rate_convention, DefaultRateConvention::Annualized);
    EXPECT_DOUBLE_EQ(d.params.confidence, 0.999);
    EXPECT_DOUBLE_EQ(d.params.recovery_rate, 0.0);
    EXPECT_DOUBLE_EQ(d.params.cir.a, 0.2);
    EXPECT_DOUBLE_EQ(d.params.cir.b, 0.05);
    EXPECT_DOUBLE_EQ(d.params.cir.sigma, 0.1);
    EXPECT_DOUBLE_EQ(d.params.cir.r0, 0.05);
    EXPECT_DOUBLE_EQ(d.params.cir.horizon_T, 30.0);
    EXPECT_EQ(d.params.price_convention, PriceConvention::DiscountedAtShortRate);
    EXPECT_EQ(d.config.iterations, 10000);
    EXPECT_EQ(d.config.credit_model, CreditModelKind::BaselOneFactor);
    EXPECT_TRUE(d.config.crn);

    // Richard-Roll constants.
    const RichardRollParams rr;
    EXPECT_DOUBLE_EQ(rr.ri_base, 0.28);
    EXPECT_DOUBLE_EQ(rr.ri_scale, 0.14);
    EXPECT_DOUBLE_EQ(rr.ri_shift, -8.571);
    EXPECT_DOUBLE_EQ(rr.ri_gain, 430.0);
    EXPECT_EQ(rr.seasoning_months, 30);
    const std::array<double, 12> mm{0.94, 0.76, 0.74, 0.95, 0.98, 0.92,
                                    0.98, 1.10, 1.18, 1.22, 1.23, 0.98};
    EXPECT_EQ(rr.monthly_multiplier, mm);
    EXPECT_DOUBLE_EQ(rr.burnout_floor, 0.3);
    EXPECT_DOUBLE_EQ(rr.burnout_slope, 0.7);
    EXPECT_DOUBLE_EQ(rr.gamma_a_const, 0.28);
    EXPECT_DOUBLE_EQ(rr.ab_exponent, 0.0784);
}

TEST(DealParser, DependentDefaultsFollowTheirAnchors) {
    // cir.b follows cir.r0; cir.T follows wam/12.
    const ParsedDeal d = parse_deal_spec(
        "[pool]\nbalance=1\nwam=120\n[tranches]\nP 1\n[model]\ncir.r0=0.07\n");
    EXPECT_DOUBLE_EQ(d.params.cir.b, 0.07);
    EXPECT_DOUBLE_EQ(d.params.cir.horizon_T, 10.0);
}

TEST(DealParser, FellerBreachIsWarningNotError) {
    const ParsedDeal d = parse_deal_spec(
        "[pool]\nbalance=1\n[tranches]\nP 1\n[model]\ncir.a=0.01\ncir.sigma=0.5\n");
    const auto violations = validate(d.deal, d.params, d.config);
    ASSERT_EQ(violations.size(), 1u);
    EXPECT_EQ(violations[0].severity, Severity::Warning);
    EXPECT_NE(violations[0].message.find("Feller"), std::string::npos);
}

TEST(DealParser, ValidateOnDefaultsIsClean) {
    const ParsedDeal d = parse_deal_spec(kExampleSpec);
    EXPECT_TRUE(validate(d.deal, d.params, d.config).empty());
}

namespace {

ParsedDeal random_deal(RandomStream& s) {
    DealSpecBuilder b;
    const double pool = 100.0 + 10000.0 * s.next_uniform();
    const int n_tranches = 1 + static_cast<int>(s.next_uniform() * 4.0);
    std::vector<double> weights;
    double total = 0.0;
    for (int i = 0; i < n_tranches; ++i) {
        weights.push_back(0.1 + s.next_uniform());
        total += weights.back();
    }
    b.assign("pool", "balance", detail::format_double(pool));
    b.assign("pool", "wac", detail::format_double(0.01 + 0.2 * s.next_uniform()));
    b.assign("pool", "wam", std::to_string(12 + static_cast<int>(s.next_uniform() * 348.0)));
    double assigned = 0.0;
    for (int i = 0; i < n_tranches; ++i) {
        // last tranche takes the exact remainder so the sum matches
        const double bal = i + 1 == n_tranches ? pool - assigned : pool * weights[i] / total;
        assigned += bal;
        b.add_tranche("T" + std::to_string(i), bal);
    }
    b.assign("model", "rho", detail::format_double(0.01 + 0.9 * s.next_uniform()));
    b.assign("model", "default_rate", detail::format_double(0.001 + 0.3 * s.next_uniform()));
    b.assign("model", "default_rate_convention", s.next_uniform() < 0.5 ? "annualized" : "monthly");
    b.assign("model", "cir.a", detail::format_double(0.05 + s.next_uniform()));
    b.assign("model", "cir.b", detail::format_double(0.01 + 0.1 * s.next_uniform()));
    b.assign("model", "cir.sigma", detail::format_double(0.3 * s.next_uniform()));
    b.assign("model", "cir.r0", detail::format_double(0.01 + 0.1 * s.next_uniform()));
    b.assign("model", "cir.T", detail::format_double(30.0 + 10.0 * s.next_uniform()));
    b.assign("model", "price_convention", s.next_uniform() < 0.5 ? "discounted" : "undiscounted");
    b.assign("model", "recovery", detail::format_double(0.9 * s.next_uniform()));
    b.assign("simulation", "iterations", std::to_string(1 + static_cast<int>(s.next_uniform() * 100)));
    b.assign("simulation", "seed", std::to_string(s.next_u64() >> 1));
    b.assign("simulation", "credit_model", s.next_uniform() < 0.5 ? "basel" : "copula");
    b.assign("simulation", "copula_loans", std::to_string(1 + static_cast<int>(s.next_uniform() * 500)));
    b.assign("simulation", "crn", s.next_uniform() < 0.5 ? "true" : "false");
    return b.build();
}

void expect_identical(const ParsedDeal& a, const ParsedDeal& b) {
    EXPECT_EQ(a.deal.pool_balance, b.deal.pool_balance);
    EXPECT_EQ(a.deal.wac, b.deal.wac);
    EXPECT_EQ(a.deal.wam, b.deal.wam);
    ASSERT_EQ(a.deal.tranches.size(), b.deal.tranches.size());
    for (std::size_t i = 0; i < a.deal.tranches.size(); ++i) {
        EXPECT_EQ(a.deal.tranches[i].name, b.deal.tranches[i].name);
        EXPECT_EQ(a.deal.tranches[i].balance, b.deal.tranches[i].balance);
    }
    EXPECT_EQ(a.params.rho, b.params.rho);
    EXPECT_EQ(a.params.annual_default_rate, b.params.annual_default_rate);
    EXPECT_EQ(a.params.default_rate_convention, b.params.default_rate_convention);
    EXPECT_EQ(a.params.cir.a, b.params.cir.a);
    EXPECT_EQ(a.params.cir.b, b.params.cir.b);
    EXPECT_EQ(a.params.cir.sigma, b.params.cir.sigma);
    EXPECT_EQ(a.params.cir.r0, b.params.cir.r0);
    EXPECT_EQ(a.params.cir.horizon_T, b.params.cir.horizon_T);
    EXPECT_EQ(a.params.price_convention, b.params.price_convention);
    EXPECT_EQ(a.params.recovery_rate, b.params.recovery_rate);
    EXPECT_EQ(a.config.iterations, b.config.iterations);
    EXPECT_EQ(a.config.seed, b.config.seed);
    EXPECT_EQ(a.config.credit_model, b.config.credit_model);
    EXPECT_EQ(a.config.copula_loans, b.config.copula_loans);
    EXPECT_EQ(a.config.crn, b.config.crn);
}

} // namespace

// serialize(parse(text)) parses back to an identical spec, field by field.
TEST(DealParser, SerializeParseRoundTrip) {
    RandomStream s = make_stream(99, 0, "parser-roundtrip");
    for (int rep = 0; rep < 50; ++rep) {
        const ParsedDeal original = random_deal(s);
        const std::string text = serialize_deal_spec(original);
        const ParsedDeal reparsed = parse_deal_spec(text);
        expect_identical(original, reparsed);
        EXPECT_EQ(text, serialize_deal_spec(reparsed));
    }
}

TEST(DealParser, OverridesMatchEditingTheFile) {
    std::istringstream in1(kExampleSpec);
    const ParsedDeal overridden =
        parse_deal_spec(in1, {"model.default_rate=0.02", "simulation.iterations=500",
                              "model.cir.r0=0.06", "pool.wac=0.09"});
    std::string edited = kExampleSpec;
    auto replace = [&edited](const std::string& from, const std::string& to) {
        edited.replace(edited.find(from), from.size(), to);
    };
    replace("default_rate=0.05", "default_rate=0.02");
    replace("iterations=10000", "iterations=500");
    replace("cir.r0=0.05", "cir.r0=0.06");
    replace("wac=0.08", "wac=0.09");
    expect_identical(overridden, parse_deal_spec(edited));
}

TEST(DealParser, OverrideBeforeDefaultResolution) {
    // Overriding r0 on a file without cir.b must move b too.
    std::istringstream in("[pool]\nbalance=1\n[tranches]\nP 1\n");
    const ParsedDeal d = parse_deal_spec(in, {"model.cir.r0=0.09"});
    EXPECT_DOUBLE_EQ(d.params.cir.b, 0.09);
}

TEST(DealParser, UnknownOverrideKeyIsRejected) {
    std::istringstream in(kExampleSpec);
    EXPECT_THROW(parse_deal_spec(in, {"model.nonsense=1"}), parse_error);
    std::istringstream in2(kExampleSpec);
    EXPECT_THROW(parse_deal_spec(in2, {"nodot"}), parse_error);
}
