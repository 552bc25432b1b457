#include "tvp/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "tvp/error.hpp"

namespace tvp::regress {

InfoCriteria info_criteria(double log_lik, std::size_t k, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double base = -2.0 * log_lik / nn;
    return {base + 2.0 * kk / nn, base + kk * std::log(nn) / nn,
            base + 2.0 * kk * std::log(std::log(nn)) / nn};
}

OlsResult ols_no_intercept(std::span<const double> y, std::span<const double> x) {
    if (y.size() != x.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("y has {} observations, x has {}", y.size(), x.size()));
    }
    const std::size_t n = y.size();
    if (n < 2) throw Error(ErrorKind::TooShort, "OLS needs at least two observations");

    double sxx = 0.0;
    double sxy = 0.0;
    double sum_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        sum_y += y[i];
    }
    if (sxx == 0.0) throw Error(ErrorKind::DegenerateRegressor, "regressor is identically zero");

    const double nn = static_cast<double>(n);
    OlsResult r;
    r.n_obs = n;
    r.coef = sxy / sxx;
    r.mean_dep = sum_y / nn;

    double tss = 0.0;
    double dw_num = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - r.coef * x[i];
        r.ssr += e * e;
        if (i > 0) dw_num += (e - prev) * (e - prev);
        prev = e;
        const double d = y[i] - r.mean_dep;
        tss += d * d;
    }

    const double dof = nn - 1.0;
    const double s2 = r.ssr / dof;
    r.se_regression = std::sqrt(s2);
    r.std_err = std::sqrt(s2 / sxx);
    r.sd_dep = std::sqrt(tss / dof);
    r.r2 = tss > 0.0 ? 1.0 - r.ssr / tss : 1.0;
    r.adj_r2 = 1.0 - (1.0 - r.r2) * (nn - 1.0) / dof;
    r.dw = r.ssr > 0.0 ? dw_num / r.ssr : 0.0;

    if (r.std_err > 0.0) {
        r.t_stat = r.coef / r.std_err;
        boost::math::students_t dist(dof);
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_stat)));
    } else {
        r.t_stat = r.coef == 0.0 ? 0.0 : std::copysign(HUGE_VAL, r.coef);
        r.p_value = r.coef == 0.0 ? 1.0 : 0.0;
    }

    r.log_lik = r.ssr > 0.0
                    ? -0.5 * nn * (1.0 + std::log(2.0 * std::numbers::pi) + std::log(r.ssr / nn))
                    : HUGE_VAL;
    const auto ic = info_criteria(r.log_lik, 1, n);
    r.aic = ic.aic;
    r.sic = ic.sic;
    r.hq = ic.hq;
    return r;
}

OlsResult ols_no_intercept(const MonthlySeries& y, const MonthlySeries& x) {
    require_aligned(y, x);
    return ols_no_intercept(y.values(), x.values());
}

namespace {

/// Index of the first observation whose predecessors give sum(x^2) > 0.
std::size_t first_recursive_index(std::span<const double> x) {
    double sxx = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (sxx > 0.0) return t;
        sxx += x[t] * x[t];
    }
    throw Error(ErrorKind::DegenerateRegressor,
                "no observation has a non-zero regressor before the end of the sample");
}

}  // namespace

MonthlySeries recursive_residuals(const MonthlySeries& y, const MonthlySeries& x) {
    require_aligned(y, x);
    const auto ys = y.values();
    const auto xs = x.values();
    if (ys.size() < 2) throw Error(ErrorKind::TooShort, "recursive residuals need at least two observations");
    const std::size_t first = first_recursive_index(xs);

    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t t = 0; t < first; ++t) {
        sxx += xs[t] * xs[t];
        sxy += xs[t] * ys[t];
    }
    std::vector<double> w;
    w.reserve(ys.size() - first);
    for (std::size_t t = first; t < ys.size(); ++t) {
        const double beta = sxy / sxx;
        w.push_back((ys[t] - xs[t] * beta) / std::sqrt(1.0 + xs[t] * xs[t] / sxx));
        sxx += xs[t] * xs[t];
        sxy += xs[t] * ys[t];
    }
    return {y.date_at(first), std::move(w), "recursive_residuals"};
}

RecursivePath recursive_coefficients(const MonthlySeries& y, const MonthlySeries& x) {
    require_aligned(y, x);
    const auto ys = y.values();
    const auto xs = x.values();
    if (ys.size() < 2) throw Error(ErrorKind::TooShort, "recursive coefficients need at least two observations");
    // Need sum(x^2) > 0 and one residual degree of freedom.
    const std::size_t first = std::max<std::size_t>(1, first_recursive_index(xs) - 1);

    RecursivePath path;
    path.start_index = first;
    path.start = y.date_at(first);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t t = 0; t < ys.size(); ++t) {
        sxx += xs[t] * xs[t];
        sxy += xs[t] * ys[t];
        syy += ys[t] * ys[t];
        if (t < first) continue;
        const double coef = sxy / sxx;
        const double ssr = std::max(0.0, syy - sxy * coef);
        const double se = std::sqrt(ssr / static_cast<double>(t) / sxx);
        path.coefs.push_back(coef);
        path.std_errs.push_back(se);
        path.bands_lo.push_back(coef - 2.0 * se);
        path.bands_hi.push_back(coef + 2.0 * se);
    }
    return path;
}

double cusum_band_scale(double significance) {
    constexpr double tol = 1e-12;
    if (std::abs(significance - 0.01) < tol) return 1.143;
    if (std::abs(significance - 0.05) < tol) return 0.948;
    if (std::abs(significance - 0.10) < tol) return 0.850;
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("CUSUM significance {} not one of 0.01, 0.05, 0.10", significance));
}

double cusum_band(double scale, std::size_t t, std::size_t n_obs, std::size_t k) {
    const double root = std::sqrt(static_cast<double>(n_obs - k));
    return scale * (root + 2.0 * (static_cast<double>(t) - static_cast<double>(k)) / root);
}

CusumResult cusum(const MonthlySeries& y, const MonthlySeries& x, double significance) {
    const double scale = cusum_band_scale(significance);
    const MonthlySeries w = recursive_residuals(y, x);
    const auto ws = w.values();
    const std::size_t n_w = ws.size();
    if (n_w < 2) throw Error(ErrorKind::TooShort, "CUSUM needs at least two recursive residuals");

    const std::size_t n_obs = y.size();
    const std::size_t k = n_obs - n_w;

    double mean = 0.0;
    for (double v : ws) mean += v;
    mean /= static_cast<double>(n_w);
    double ss = 0.0;
    for (double v : ws) ss += (v - mean) * (v - mean);

    CusumResult r;
    r.start = w.start();
    r.significance = significance;
    r.sigma = std::sqrt(ss / static_cast<double>(n_w - 1));
    if (!(r.sigma > 0.0)) {
        throw Error(ErrorKind::DegenerateRegressor, "recursive residuals have zero dispersion");
    }

    double cum = 0.0;
    for (std::size_t i = 0; i < n_w; ++i) {
        cum += ws[i];
        const double stat = cum / r.sigma;
        const double band = cusum_band(scale, k + 1 + i, n_obs, k);
        r.statistic.push_back(stat);
        r.band_hi.push_back(band);
        r.band_lo.push_back(-band);
        if (!r.first_crossing && std::abs(stat) > band) r.first_crossing = w.date_at(i);
    }
    r.stable = !r.first_crossing.has_value();
    return r;
}

}  // namespace tvp::regress
