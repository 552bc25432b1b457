#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "tvp/series.hpp"

namespace tvp::sspace {

/// Time-varying-coefficient regression in state-space form:
///   y_t     = x_t a_t + u_t,          u_t ~ N(0, var_meas)
///   a_t     = gamma a_{t-1} + e_t,    e_t ~ N(0, var_state)
struct TvpModel {
    MonthDate start;
    std::vector<double> y;
    std::vector<double> x;
    double gamma = 1.0;

    /// Requires aligned series.
    static TvpModel from_series(const MonthlySeries& y, const MonthlySeries& x, double gamma = 1.0);

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
};

/// Log-variances of the measurement and state disturbances.
struct VarianceParams {
    double log_var_meas = 0.0;
    double log_var_state = 0.0;

    [[nodiscard]] double var_meas() const;
    [[nodiscard]] double var_state() const;
};

[[nodiscard]] double variance_from_log(double v);

/// Prior for the state before the first observation.
struct StateInit {
    enum class Kind {
        /// a_0 = 0, P_0 = kappa * mean(y^2) / max(mean(x^2), eps); the first
        /// innovation is left out of the likelihood.
        BigK,
        /// The kappa -> infinity limit of BigK taken analytically:
        /// a_{1|1} = y_1/x_1, P_{1|1} = var_meas/x_1^2. Requires x_1 != 0.
        DiffuseLimit,
        /// Proper prior N(mean, var); every innovation enters the likelihood.
        Explicit,
    };
    Kind kind = Kind::BigK;
    double mean = 0.0;
    double var = 0.0;
    double kappa = 1e7;

    static StateInit diffuse() { return {}; }
    static StateInit diffuse_limit() { return {Kind::DiffuseLimit, 0.0, 0.0, 0.0}; }
    static StateInit proper(double mean, double var);
};

struct KalmanOutput {
    MonthDate start;
    std::vector<double> pred_mean;  ///< a_{t|t-1}
    std::vector<double> pred_var;   ///< P_{t|t-1}
    std::vector<double> filt_mean;  ///< a_{t|t}
    std::vector<double> filt_var;   ///< P_{t|t}
    std::vector<double> innovations;
    std::vector<double> innov_var;
    std::vector<double> loglik_terms;  ///< zero for dropped diffuse observations
    double log_lik = 0.0;
    std::size_t n_diffuse_dropped = 0;
    double gamma = 1.0;
    double var_state = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return filt_mean.size(); }
    /// One-step-ahead forecast beyond the sample: a_{T+1|T}, P_{T+1|T}.
    [[nodiscard]] double next_mean() const { return gamma * filt_mean.back(); }
    [[nodiscard]] double next_var() const { return gamma * gamma * filt_var.back() + var_state; }
};

/// Throws EmptySeries, InvalidArgument (bad prior), NonFiniteState.
[[nodiscard]] KalmanOutput kalman_filter(const TvpModel& model, const VarianceParams& params,
                                         const StateInit& init = StateInit::diffuse());

struct SmoothedStates {
    std::vector<double> means;
    std::vector<double> vars;
};

/// Fixed-interval (Rauch-Tung-Striebel) smoother. Throws MismatchedOutput.
[[nodiscard]] SmoothedStates kalman_smoother(const TvpModel& model, const VarianceParams& params,
                                             const KalmanOutput& output);

[[nodiscard]] double log_likelihood(const TvpModel& model, const VarianceParams& params,
                                    const StateInit& init = StateInit::diffuse());

/// Exact derivative of the log-likelihood with respect to
/// (log_var_meas, log_var_state, gamma), by differentiating the filter recursions.
struct LikelihoodGradient {
    double log_lik;
    std::array<double, 3> grad;
};
[[nodiscard]] LikelihoodGradient log_likelihood_gradient(const TvpModel& model,
                                                         const VarianceParams& params,
                                                         const StateInit& init = StateInit::diffuse());

/// Central finite-difference gradient over the two log-variances, step
/// 1e-4 * max(1, |theta|).
[[nodiscard]] std::array<double, 2> fd_gradient(const TvpModel& model, const VarianceParams& params,
                                                const StateInit& init = StateInit::diffuse());

enum class Parameterization { LogVariance, Variance };

struct MleOptions {
    StateInit init = StateInit::diffuse();
    int max_iter = 500;
    double grad_tol = 1e-6;
    double rel_tol = 1e-9;
    Parameterization parameterization = Parameterization::LogVariance;
    bool estimate_gamma = false;
    /// Box for the log-variances (or their exp under Variance parameterization).
    double log_var_lower = -30.0;
    double log_var_upper = 30.0;
    /// Return a non-converged result instead of throwing NoConvergence.
    bool allow_nonconverged = false;
};

struct MleResult {
    VarianceParams params;
    std::array<double, 2> robust_se{};
    std::array<double, 2> z_stats{};
    std::array<double, 2> p_values{};
    double var_meas = 0.0;
    double var_state = 0.0;
    double gamma = 1.0;
    std::optional<double> gamma_se;
    double final_state = 0.0;  ///< a_{T|T}
    double final_rmse = 0.0;   ///< sqrt(P_{T|T})
    double final_z = 0.0;
    double final_p = 0.0;
    double next_state = 0.0;  ///< a_{T+1|T}
    double next_rmse = 0.0;
    double log_lik = 0.0;
    double aic = 0.0;
    double sic = 0.0;
    double hq = 0.0;
    std::size_t n_obs = 0;
    std::size_t n_params = 2;
    std::size_t n_diffuse = 0;
    int n_iter = 0;
    bool converged = false;
    bool at_bound = false;
    std::string message;
    double fd_gradient_inf = 0.0;  ///< finite-difference gradient inf-norm at the optimum
    std::vector<double> loglik_trace;
};

/// Starting values from a small grid around the OLS residual variance,
/// keeping the best log-likelihood.
[[nodiscard]] VarianceParams default_start(const TvpModel& model,
                                           const StateInit& init = StateInit::diffuse());

/// Maximum-likelihood estimation with Huber-White sandwich standard errors
/// H^-1 G H^-1 (observed Hessian by central differences, G from per-observation
/// numerical scores). Throws NoConvergence unless allow_nonconverged.
[[nodiscard]] MleResult fit_mle(const TvpModel& model, const VarianceParams& start,
                                const MleOptions& options = {});

struct ShockSeries {
    MonthlySeries shocks;     ///< v_t / sqrt(F_t)
    std::size_t burn_in = 0;  ///< leading entries inside the diffuse burn-in
};

[[nodiscard]] ShockSeries innovation_shocks(const KalmanOutput& output);

}  // namespace tvp::sspace
