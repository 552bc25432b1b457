#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "tvp/series.hpp"

namespace tvp::unitroot {

enum class Deterministic { None, Constant, ConstantTrend };
enum class LagSelection { Fixed, Schwarz };

[[nodiscard]] Deterministic parse_deterministic(std::string_view text);
[[nodiscard]] std::string_view to_string(Deterministic d) noexcept;

struct AdfSpec {
    Deterministic deterministic = Deterministic::ConstantTrend;
    /// Negative selects floor(12 * (T/100)^0.25).
    int max_lags = -1;
    LagSelection selection = LagSelection::Schwarz;
};

struct CriticalValues {
    double crit_1;
    double crit_5;
    double crit_10;
};

struct AdfResult {
    double statistic = 0.0;  ///< t-ratio on the lagged level
    std::size_t chosen_lags = 0;
    std::size_t max_lags = 0;
    double crit_1 = 0.0;
    double crit_5 = 0.0;
    double crit_10 = 0.0;
    double p_value_approx = 1.0;
    std::optional<double> reject_at;  ///< 0.01, 0.05 or 0.10
    std::size_t n_used = 0;
    Deterministic deterministic = Deterministic::ConstantTrend;
};

[[nodiscard]] std::size_t default_max_lags(std::size_t n_obs);

/// Augmented Dickey-Fuller regression
///   dX_t = [c] + [d t] + b X_{t-1} + sum_{j=1..p} g_j dX_{t-j} + e_t,
/// returning the t-ratio on b. Under Schwarz selection every p in 0..max_lags is
/// scored on the sample trimmed for max_lags, then the chosen p is re-estimated
/// on its own largest sample. Throws TooShort or DegenerateDesign.
[[nodiscard]] AdfResult adf(const MonthlySeries& s, const AdfSpec& spec = {});

/// Dickey-Fuller t quantiles at 1/5/10%, interpolated in 1/T from an embedded
/// finite-sample table. Requires T >= 25.
[[nodiscard]] CriticalValues critical_values(std::size_t n_obs, Deterministic deterministic);

/// Left-tail probability of the Dickey-Fuller t distribution, from the same
/// table (probit-linear interpolation between quantiles, linear extrapolation
/// beyond the 1% and 99% points).
[[nodiscard]] double approx_pvalue(double statistic, std::size_t n_obs, Deterministic deterministic);

}  // namespace tvp::unitroot
