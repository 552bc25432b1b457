#include "tvp/unitroot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "tvp/error.hpp"

namespace tvp::unitroot {

Deterministic parse_deterministic(std::string_view text) {
    if (text == "none") return Deterministic::None;
    if (text == "constant" || text == "c") return Deterministic::Constant;
    if (text == "trend" || text == "constant+trend" || text == "ct") return Deterministic::ConstantTrend;
    throw Error(ErrorKind::UnsupportedCase,
                fmt::format("unknown deterministic case '{}' (none, constant, trend)", text));
}

std::string_view to_string(Deterministic d) noexcept {
    switch (d) {
        case Deterministic::None: return "none";
        case Deterministic::Constant: return "constant";
        case Deterministic::ConstantTrend: return "constant+trend";
    }
    return "?";
}

std::size_t default_max_lags(std::size_t n_obs) {
    return static_cast<std::size_t>(
        std::floor(12.0 * std::pow(static_cast<double>(n_obs) / 100.0, 0.25)));
}

// ------------------------------------------------------------ quantile table

namespace {

// Dickey-Fuller t-statistic percentiles (Fuller 1976), rows T = 25, 50, 100,
// 250, 500, infinity.
constexpr std::array<double, 8> kProbs = {0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
constexpr std::array<double, 6> kSizes = {25, 50, 100, 250, 500,
                                          std::numeric_limits<double>::infinity()};
using QuantileTable = std::array<std::array<double, 8>, 6>;

constexpr QuantileTable kNone = {{
    {-2.66, -2.26, -1.95, -1.60, 0.92, 1.33, 1.70, 2.16},
    {-2.62, -2.25, -1.95, -1.61, 0.91, 1.31, 1.66, 2.08},
    {-2.60, -2.24, -1.95, -1.61, 0.90, 1.29, 1.64, 2.03},
    {-2.58, -2.23, -1.95, -1.62, 0.89, 1.29, 1.63, 2.01},
    {-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00},
    {-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00},
}};

constexpr QuantileTable kConstant = {{
    {-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72},
    {-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66},
    {-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63},
    {-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62},
    {-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61},
    {-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60},
}};

constexpr QuantileTable kTrend = {{
    {-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15},
    {-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24},
    {-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28},
    {-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31},
    {-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32},
    {-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33},
}};

const QuantileTable& table_for(Deterministic d) {
    switch (d) {
        case Deterministic::None: return kNone;
        case Deterministic::Constant: return kConstant;
        case Deterministic::ConstantTrend: return kTrend;
    }
    throw Error(ErrorKind::UnsupportedCase, "unsupported deterministic case");
}

/// Quantile row for sample size T, linear in 1/T between table rows.
std::array<double, 8> quantiles_at(std::size_t n_obs, Deterministic d) {
    if (n_obs < 25) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("critical values need T >= 25, got {}", n_obs));
    }
    const auto& table = table_for(d);
    const double inv = 1.0 / static_cast<double>(n_obs);
    std::size_t hi = 1;  // first row with 1/size <= inv
    while (hi < kSizes.size() && 1.0 / kSizes[hi] > inv) ++hi;
    const std::size_t lo = hi - 1;
    const double inv_lo = 1.0 / kSizes[lo];
    const double inv_hi = 1.0 / kSizes[hi];
    const double w = (inv - inv_hi) / (inv_lo - inv_hi);  // weight on the smaller-T row
    std::array<double, 8> out{};
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = w * table[lo][j] + (1.0 - w) * table[hi][j];
    }
    return out;
}

}  // namespace

CriticalValues critical_values(std::size_t n_obs, Deterministic deterministic) {
    const auto q = quantiles_at(n_obs, deterministic);
    return {q[0], q[2], q[3]};
}

double approx_pvalue(double statistic, std::size_t n_obs, Deterministic deterministic) {
    const auto q = quantiles_at(n_obs, deterministic);
    const boost::math::normal_distribution<double> normal;
    std::array<double, 8> z{};
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = boost::math::quantile(normal, kProbs[j]);

    std::size_t seg = 0;  // segment [seg, seg+1] used for interpolation
    if (statistic >= q.back()) {
        seg = q.size() - 2;
    } else {
        while (seg + 2 < q.size() && statistic > q[seg + 1]) ++seg;
    }
    const double slope = (z[seg + 1] - z[seg]) / (q[seg + 1] - q[seg]);
    const double score = z[seg] + slope * (statistic - q[seg]);
    return boost::math::cdf(normal, std::clamp(score, -37.0, 37.0));
}

// ------------------------------------------------------------------ ADF

namespace {

struct Fit {
    double t_stat;
    double ssr;
    std::size_t n;
    std::size_t k;
};

/// OLS of dX_i on [X_{i-1}, deterministics, dX_{i-1..i-lags}] for i in
/// [first, levels.size()), returning the t-ratio on X_{i-1}.
Fit adf_regression(std::span<const double> levels, std::size_t lags, std::size_t first,
                   Deterministic det) {
    const std::size_t n = levels.size() - first;
    const std::size_t n_det = det == Deterministic::None ? 0 : (det == Deterministic::Constant ? 1 : 2);
    const std::size_t k = 1 + n_det + lags;
    if (n <= k) throw Error(ErrorKind::TooShort, "ADF regression has no residual degrees of freedom");

    Eigen::MatrixXd design(n, k);
    Eigen::VectorXd dep(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = first + r;
        dep(r) = levels[i] - levels[i - 1];
        std::size_t c = 0;
        design(r, c++) = levels[i - 1];
        if (n_det >= 1) design(r, c++) = 1.0;
        if (n_det == 2) design(r, c++) = static_cast<double>(i);
        for (std::size_t j = 1; j <= lags; ++j) design(r, c++) = levels[i - j] - levels[i - j - 1];
    }

    // Unit-norm columns so the rank threshold is scale free.
    Eigen::VectorXd norms = design.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < norms.size(); ++c) {
        if (norms(c) == 0.0) {
            throw Error(ErrorKind::DegenerateDesign, "ADF design has an all-zero column");
        }
        design.col(c) /= norms(c);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
        throw Error(ErrorKind::DegenerateDesign, "ADF regressors are collinear");
    }
    const Eigen::VectorXd beta = qr.solve(dep);
    const Eigen::VectorXd resid = dep - design * beta;
    const double ssr = resid.squaredNorm();
    if (!(ssr > 1e-20 * std::max(1.0, dep.squaredNorm()))) {
        throw Error(ErrorKind::DegenerateDesign, "ADF regression fits the differences exactly");
    }

    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::MatrixXd r_upper = qr.matrixR().topLeftCorner(kk, kk).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r_upper.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(kk, kk));
    const Eigen::MatrixXd unpermuted = qr.colsPermutation() * r_inv;  // rows in design order
    const double xtx_inv_00 = unpermuted.row(0).squaredNorm();
    const double s2 = ssr / static_cast<double>(n - k);
    const double se = std::sqrt(s2 * xtx_inv_00);
    return {beta(0) / se, ssr, n, k};
}

}  // namespace

AdfResult adf(const MonthlySeries& s, const AdfSpec& spec) {
    const std::size_t n_obs = s.size();
    const std::size_t max_lags =
        spec.max_lags < 0 ? default_max_lags(n_obs) : static_cast<std::size_t>(spec.max_lags);
    if (n_obs < max_lags + 12 || 3 * max_lags >= n_obs) {
        throw Error(ErrorKind::TooShort,
                    fmt::format("ADF on '{}' with {} lags needs more than {} observations", s.name(),
                                max_lags, n_obs));
    }
    const auto levels = s.values();

    std::size_t lags = max_lags;
    if (spec.selection == LagSelection::Schwarz) {
        const std::size_t first = max_lags + 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p <= max_lags; ++p) {
            const Fit fit = adf_regression(levels, p, first, spec.deterministic);
            const double nn = static_cast<double>(fit.n);
            const double sic = std::log(fit.ssr / nn) + static_cast<double>(fit.k) * std::log(nn) / nn;
            if (sic < best) {
                best = sic;
                lags = p;
            }
        }
    }

    const Fit fit = adf_regression(levels, lags, lags + 1, spec.deterministic);
    AdfResult r;
    r.statistic = fit.t_stat;
    r.chosen_lags = lags;
    r.max_lags = max_lags;
    r.n_used = fit.n;
    r.deterministic = spec.deterministic;
    const std::size_t table_n = std::max<std::size_t>(fit.n, 25);
    const auto cv = critical_values(table_n, spec.deterministic);
    r.crit_1 = cv.crit_1;
    r.crit_5 = cv.crit_5;
    r.crit_10 = cv.crit_10;
    r.p_value_approx = approx_pvalue(fit.t_stat, table_n, spec.deterministic);
    if (fit.t_stat < cv.crit_1) {
        r.reject_at = 0.01;
    } else if (fit.t_stat < cv.crit_5) {
        r.reject_at = 0.05;
    } else if (fit.t_stat < cv.crit_10) {
        r.reject_at = 0.10;
    }
    return r;
}

}  // namespace tvp::unitroot
