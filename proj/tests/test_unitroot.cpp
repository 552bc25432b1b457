#include <cmath>

#include <doctest.h>

#include "tvp/error.hpp"
#include "tvp/simlab.hpp"
#include "tvp/unitroot.hpp"

using namespace tvp;
using namespace tvp::unitroot;

TEST_CASE("critical values") {
    for (auto det : {Deterministic::None, Deterministic::Constant, Deterministic::ConstantTrend}) {
        for (std::size_t t : {25u, 60u, 200u, 543u, 100000u}) {
            const auto cv = critical_values(t, det);
            CHECK(cv.crit_1 < cv.crit_5);
            CHECK(cv.crit_5 < cv.crit_10);
            CHECK(cv.crit_10 < 0.0);
        }
    }
    const auto ct = critical_values(543, Deterministic::ConstantTrend);
    CHECK(std::abs(ct.crit_1 - -3.975046) <= 0.02);
    CHECK(std::abs(ct.crit_5 - -3.418117) <= 0.02);
    CHECK(std::abs(ct.crit_10 - -3.13153) <= 0.02);

    // Asymptotic constant case: 1% -3.43, 5% -2.86, 10% -2.57.
    const auto c = critical_values(10'000'000, Deterministic::Constant);
    CHECK(std::abs(c.crit_1 - -3.43) <= 0.02);
    CHECK(std::abs(c.crit_5 - -2.86) <= 0.02);
    CHECK(std::abs(c.crit_10 - -2.57) <= 0.02);

    const auto again = critical_values(543, Deterministic::ConstantTrend);
    CHECK(again.crit_1 == ct.crit_1);
    CHECK(again.crit_5 == ct.crit_5);
    CHECK_THROWS_AS((void)critical_values(24, Deterministic::Constant), Error);
}

TEST_CASE("approximate p-values") {
    for (auto det : {Deterministic::Constant, Deterministic::ConstantTrend}) {
        const auto cv = critical_values(543, det);
        CHECK(std::abs(approx_pvalue(cv.crit_5, 543, det) - 0.05) <= 0.005);
        CHECK(std::abs(approx_pvalue(cv.crit_1, 543, det) - 0.01) <= 0.002);
        double prev = -0.1;
        for (double s = -8.0; s <= 3.0; s += 0.05) {
            const double p = approx_pvalue(s, 543, det);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            CHECK(p >= prev);
            prev = p;
        }
    }
    CHECK(approx_pvalue(-14.14, 543, Deterministic::ConstantTrend) < 1e-4);
    CHECK(approx_pvalue(0.0, 543, Deterministic::ConstantTrend) > 0.90);
}

TEST_CASE("default lag rule") {
    CHECK(default_max_lags(100) == 12);
    CHECK(default_max_lags(543) == 18);
    CHECK(default_max_lags(500) == 17);
}

TEST_CASE("exact trend is degenerate, not a silent statistic") {
    std::vector<double> v(100);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = static_cast<double>(t);
    const MonthlySeries s({2000, 1}, v);
    bool flagged = false;
    try {
        const auto r = adf(s, {Deterministic::ConstantTrend, 2, LagSelection::Fixed});
        flagged = std::abs(r.statistic) > 1e6;
    } catch (const Error& e) {
        flagged = e.kind() == ErrorKind::DegenerateDesign;
    }
    CHECK(flagged);
}

TEST_CASE("location and scale invariance") {
    const auto s = simlab::gen_unit_root(300, 0.1, 42);
    std::vector<double> moved(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) moved[i] = 5.0 - 3.0 * s[i];
    for (auto det : {Deterministic::Constant, Deterministic::ConstantTrend}) {
        const AdfSpec spec{det, -1, LagSelection::Schwarz};
        const auto a = adf(s, spec);
        const auto b = adf(MonthlySeries(s.start(), moved), spec);
        CHECK(a.chosen_lags == b.chosen_lags);
        CHECK(std::abs(a.statistic - b.statistic) < 1e-9);
    }
}

TEST_CASE("lag selection is deterministic and within bounds") {
    const auto s = simlab::gen_ar1(400, 0.6, 3);
    const auto a = adf(s);
    const auto b = adf(s);
    CHECK(a.chosen_lags == b.chosen_lags);
    CHECK(a.statistic == b.statistic);
    CHECK(a.max_lags == default_max_lags(400));
    CHECK(a.chosen_lags <= a.max_lags);
    const auto fixed = adf(s, {Deterministic::Constant, 3, LagSelection::Fixed});
    CHECK(fixed.chosen_lags == 3);
    CHECK(fixed.n_used == 400 - 3 - 1);
}

TEST_CASE("reject_at is the tightest level passed") {
    const auto s = simlab::gen_ar1(500, 0.3, 8);
    const auto r = adf(s);
    REQUIRE(r.reject_at.has_value());
    CHECK(*r.reject_at == 0.01);
    CHECK(r.statistic < r.crit_1);
    const auto rw = adf(simlab::gen_unit_root(500, 0.0, 8));
    if (rw.reject_at) {
        const double cv = *rw.reject_at == 0.01 ? rw.crit_1 : *rw.reject_at == 0.05 ? rw.crit_5 : rw.crit_10;
        CHECK(rw.statistic < cv);
    } else {
        CHECK(rw.statistic >= rw.crit_10);
    }
}

TEST_CASE("differencing contract on synthetic I(1) data") {
    const auto level = simlab::gen_unit_root(543, 0.2, 1971);
    const auto l = adf(level, {Deterministic::ConstantTrend, -1, LagSelection::Schwarz});
    const auto d = adf(first_difference(level), {Deterministic::Constant, -1, LagSelection::Schwarz});
    CHECK_FALSE((l.reject_at && *l.reject_at == 0.01));
    REQUIRE(d.reject_at.has_value());
    CHECK(*d.reject_at == 0.01);
}

TEST_CASE("too-short samples") {
    const auto s = simlab::gen_unit_root(25, 0.0, 1);
    CHECK_THROWS_AS((void)adf(s, {Deterministic::Constant, 10, LagSelection::Fixed}), Error);
    CHECK_THROWS_AS((void)parse_deterministic("quadratic"), Error);
}
