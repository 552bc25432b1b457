#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tvp/series.hpp"

namespace tvp::regress {

/// No-intercept single-regressor OLS fit with the usual diagnostic battery.
/// Information criteria are per observation: -2*loglik/n + penalty/n.
struct OlsResult {
    double coef = 0.0;
    double std_err = 0.0;
    double t_stat = 0.0;
    double p_value = 0.0;  ///< two-sided, Student t with n-1 df
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double se_regression = 0.0;
    double ssr = 0.0;
    double log_lik = 0.0;
    double aic = 0.0;
    double sic = 0.0;
    double hq = 0.0;
    double dw = 0.0;
    double mean_dep = 0.0;
    double sd_dep = 0.0;
    std::size_t n_obs = 0;
};

/// Per-observation information criteria from a Gaussian log-likelihood with
/// `k` estimated parameters over `n` observations.
struct InfoCriteria {
    double aic;
    double sic;
    double hq;
};
[[nodiscard]] InfoCriteria info_criteria(double log_lik, std::size_t k, std::size_t n);

/// Throws DegenerateRegressor when sum(x^2) == 0, LengthMismatch on unequal spans.
[[nodiscard]] OlsResult ols_no_intercept(std::span<const double> y, std::span<const double> x);
[[nodiscard]] OlsResult ols_no_intercept(const MonthlySeries& y, const MonthlySeries& x);

/// Standardized one-step-ahead prediction errors
///   w_t = (y_t - x_t b_{t-1}) / sqrt(1 + x_t^2 / sum_{s<t} x_s^2),
/// dated from the first observation with a defined prior estimate.
[[nodiscard]] MonthlySeries recursive_residuals(const MonthlySeries& y, const MonthlySeries& x);

struct RecursivePath {
    MonthDate start;               ///< date of coefs[0]
    std::size_t start_index = 0;   ///< 0-based position of coefs[0] in the input
    std::vector<double> coefs;
    std::vector<double> std_errs;
    std::vector<double> bands_lo;  ///< coef - 2 se
    std::vector<double> bands_hi;  ///< coef + 2 se
};

/// Expanding-sample OLS coefficient, from the first sample with a positive
/// residual degree of freedom up to the full sample.
[[nodiscard]] RecursivePath recursive_coefficients(const MonthlySeries& y, const MonthlySeries& x);

/// Brown-Durbin-Evans band scale for 1%, 5% and 10%. Other levels throw InvalidArgument.
[[nodiscard]] double cusum_band_scale(double significance);

/// Upper CUSUM band a*[sqrt(T-k) + 2(t-k)/sqrt(T-k)] at 1-based time t.
[[nodiscard]] double cusum_band(double scale, std::size_t t, std::size_t n_obs, std::size_t k = 1);

struct CusumResult {
    MonthDate start;  ///< date of statistic[0]
    std::vector<double> statistic;
    std::vector<double> band_lo;
    std::vector<double> band_hi;
    double significance = 0.05;
    double sigma = 0.0;  ///< scale of the recursive residuals, denominator T-k-1
    std::optional<MonthDate> first_crossing;
    bool stable = true;
};

[[nodiscard]] CusumResult cusum(const MonthlySeries& y, const MonthlySeries& x,
                                double significance = 0.05);

}  // namespace tvp::regress
