#include "tvp/sspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "tvp/error.hpp"
#include "tvp/optim.hpp"
#include "tvp/regress.hpp"

namespace tvp::sspace {

TvpModel TvpModel::from_series(const MonthlySeries& y, const MonthlySeries& x, double gamma) {
    require_aligned(y, x);
    return {y.start(), {y.values().begin(), y.values().end()}, {x.values().begin(), x.values().end()},
            gamma};
}

double variance_from_log(double v) { return std::exp(v); }

double VarianceParams::var_meas() const { return variance_from_log(log_var_meas); }
double VarianceParams::var_state() const { return variance_from_log(log_var_state); }

StateInit StateInit::proper(double mean, double var) {
    if (!(var >= 0.0) || !std::isfinite(var) || !std::isfinite(mean)) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("explicit prior needs finite mean and var >= 0 (got {}, {})", mean, var));
    }
    return {Kind::Explicit, mean, var, 0.0};
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // ln(2*pi)

double mean_square(std::span<const double> v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return s / static_cast<double>(v.size());
}

double big_k_prior_var(const TvpModel& model, double kappa) {
    const double ms_y = mean_square(model.y);
    const double ms_x = std::max(mean_square(model.x), 1e-12);
    const double p0 = kappa * ms_y / ms_x;
    return p0 > 0.0 && std::isfinite(p0) ? p0 : kappa;
}

using Grad3 = std::array<double, 3>;

/// Runs the filter; fills `out` when non-null and the parameter derivatives of
/// the log-likelihood when `grad` is non-null.
double run_filter(const TvpModel& model, double var_meas, double var_state, double gamma,
                  const StateInit& init, KalmanOutput* out, Grad3* grad) {
    const std::size_t n = model.size();
    if (n == 0) throw Error(ErrorKind::EmptySeries, "state-space model has no observations");
    if (model.x.size() != n) {
        throw Error(ErrorKind::LengthMismatch, "state-space y and x differ in length");
    }
    if (!(var_meas > 0.0) || !(var_state >= 0.0) || !std::isfinite(var_meas) ||
        !std::isfinite(var_state) || !std::isfinite(gamma)) {
        throw Error(ErrorKind::NonFiniteState,
                    fmt::format("invalid variances ({}, {}) or gamma {}", var_meas, var_state, gamma));
    }

    if (out != nullptr) {
        *out = KalmanOutput{};
        out->start = model.start;
        out->gamma = gamma;
        out->var_state = var_state;
        for (auto* v : {&out->pred_mean, &out->pred_var, &out->filt_mean, &out->filt_var,
                        &out->innovations, &out->innov_var, &out->loglik_terms}) {
            v->resize(n);
        }
    }

    const Grad3 d_meas = {var_meas, 0.0, 0.0};
    const Grad3 d_state = {0.0, var_state, 0.0};
    const std::size_t n_grad = grad != nullptr ? 3 : 0;

    double a_prev = 0.0;
    double p_prev = 0.0;
    Grad3 da_prev{};
    Grad3 dp_prev{};
    std::size_t dropped = 0;
    std::size_t first = 0;
    double loglik = 0.0;
    Grad3 dl{};

    switch (init.kind) {
        case StateInit::Kind::BigK:
            p_prev = big_k_prior_var(model, init.kappa);
            dropped = 1;
            break;
        case StateInit::Kind::Explicit:
            a_prev = init.mean;
            p_prev = init.var;
            break;
        case StateInit::Kind::DiffuseLimit: {
            const double x0 = model.x[0];
            if (x0 == 0.0) {
                throw Error(ErrorKind::InvalidArgument,
                            "diffuse-limit initialization needs a non-zero first regressor");
            }
            a_prev = model.y[0] / x0;
            p_prev = var_meas / (x0 * x0);
            dp_prev = {p_prev, 0.0, 0.0};
            dropped = 1;
            first = 1;
            if (out != nullptr) {
                out->pred_mean[0] = 0.0;
                out->pred_var[0] = std::numeric_limits<double>::infinity();
                out->filt_mean[0] = a_prev;
                out->filt_var[0] = p_prev;
                out->innovations[0] = model.y[0];
                out->innov_var[0] = std::numeric_limits<double>::infinity();
                out->loglik_terms[0] = 0.0;
            }
            break;
        }
    }

    for (std::size_t t = first; t < n; ++t) {
        const double x = model.x[t];
        const double y = model.y[t];

        const double a_pred = gamma * a_prev;
        const double p_pred = gamma * gamma * p_prev + var_state;
        const double v = y - x * a_pred;
        const double f = x * x * p_pred + var_meas;
        const double k = p_pred * x / f;
        const double a_filt = a_pred + k * v;
        const double p_filt = p_pred * var_meas / f;

        if (!std::isfinite(a_filt) || !std::isfinite(p_filt) || !std::isfinite(f) || !(f > 0.0)) {
            throw Error(ErrorKind::NonFiniteState,
                        fmt::format("filter state not finite at observation {}", t + 1));
        }

        const bool counted = t >= dropped;
        const double term = counted ? -0.5 * (kLog2Pi + std::log(f) + v * v / f) : 0.0;
        loglik += term;

        Grad3 da_filt{};
        Grad3 dp_filt{};
        for (std::size_t i = 0; i < n_grad; ++i) {
            const double da_pred = gamma * da_prev[i] + (i == 2 ? a_prev : 0.0);
            const double dp_pred =
                gamma * gamma * dp_prev[i] + (i == 2 ? 2.0 * gamma * p_prev : 0.0) + d_state[i];
            const double dv = -x * da_pred;
            const double df = x * x * dp_pred + d_meas[i];
            const double dk = x * (dp_pred * var_meas - p_pred * d_meas[i]) / (f * f);
            da_filt[i] = da_pred + dk * v + k * dv;
            dp_filt[i] = (dp_pred * var_meas * var_meas + p_pred * p_pred * x * x * d_meas[i]) / (f * f);
            if (counted) dl[i] += -0.5 * (df / f + 2.0 * v * dv / f - v * v * df / (f * f));
        }

        if (out != nullptr) {
            out->pred_mean[t] = a_pred;
            out->pred_var[t] = p_pred;
            out->filt_mean[t] = a_filt;
            out->filt_var[t] = p_filt;
            out->innovations[t] = v;
            out->innov_var[t] = f;
            out->loglik_terms[t] = term;
        }
        a_prev = a_filt;
        p_prev = p_filt;
        da_prev = da_filt;
        dp_prev = dp_filt;
    }

    if (out != nullptr) {
        out->log_lik = loglik;
        out->n_diffuse_dropped = dropped;
    }
    if (grad != nullptr) *grad = dl;
    return loglik;
}

}  // namespace

KalmanOutput kalman_filter(const TvpModel& model, const VarianceParams& params, const StateInit& init) {
    KalmanOutput out;
    run_filter(model, params.var_meas(), params.var_state(), model.gamma, init, &out, nullptr);
    return out;
}

SmoothedStates kalman_smoother(const TvpModel& model, const VarianceParams& params,
                               const KalmanOutput& output) {
    const std::size_t n = model.size();
    if (output.size() != n || output.pred_var.size() != n || n == 0 || output.gamma != model.gamma ||
        output.var_state != params.var_state()) {
        throw Error(ErrorKind::MismatchedOutput,
                    "filter output does not belong to this model and parameter set");
    }
    SmoothedStates s;
    s.means.resize(n);
    s.vars.resize(n);
    s.means[n - 1] = output.filt_mean[n - 1];
    s.vars[n - 1] = output.filt_var[n - 1];
    const double gamma = model.gamma;
    for (std::size_t t = n - 1; t-- > 0;) {
        const double gain = gamma * output.filt_var[t] / output.pred_var[t + 1];
        s.means[t] = output.filt_mean[t] + gain * (s.means[t + 1] - output.pred_mean[t + 1]);
        s.vars[t] = output.filt_var[t] + gain * gain * (s.vars[t + 1] - output.pred_var[t + 1]);
    }
    return s;
}

double log_likelihood(const TvpModel& model, const VarianceParams& params, const StateInit& init) {
    return run_filter(model, params.var_meas(), params.var_state(), model.gamma, init, nullptr, nullptr);
}

LikelihoodGradient log_likelihood_gradient(const TvpModel& model, const VarianceParams& params,
                                           const StateInit& init) {
    LikelihoodGradient g{};
    g.log_lik = run_filter(model, params.var_meas(), params.var_state(), model.gamma, init, nullptr,
                           &g.grad);
    return g;
}

namespace {

double fd_step(double theta) { return 1e-4 * std::max(1.0, std::abs(theta)); }

/// theta = (log_var_meas, log_var_state[, gamma])
double loglik_at(const TvpModel& model, std::span<const double> theta, const StateInit& init,
                 KalmanOutput* out = nullptr) {
    const double gamma = theta.size() > 2 ? theta[2] : model.gamma;
    return run_filter(model, std::exp(theta[0]), std::exp(theta[1]), gamma, init, out, nullptr);
}

}  // namespace

std::array<double, 2> fd_gradient(const TvpModel& model, const VarianceParams& params,
                                  const StateInit& init) {
    const std::array<double, 2> theta = {params.log_var_meas, params.log_var_state};
    std::array<double, 2> g{};
    for (std::size_t i = 0; i < 2; ++i) {
        const double h = fd_step(theta[i]);
        auto plus = theta;
        auto minus = theta;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (loglik_at(model, plus, init) - loglik_at(model, minus, init)) / (2.0 * h);
    }
    return g;
}

VarianceParams default_start(const TvpModel& model, const StateInit& init) {
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t t = 0; t < model.size(); ++t) {
        sxx += model.x[t] * model.x[t];
        sxy += model.x[t] * model.y[t];
    }
    const double coef = sxx > 0.0 ? sxy / sxx : 0.0;
    double ssr = 0.0;
    for (std::size_t t = 0; t < model.size(); ++t) {
        const double e = model.y[t] - coef * model.x[t];
        ssr += e * e;
    }
    const double s2 = std::max(ssr / static_cast<double>(model.size()), 1e-12);
    const double ms_x = std::max(sxx / static_cast<double>(model.size()), 1e-12);

    VarianceParams best{std::log(s2), std::log(s2 / ms_x) - 3.0};
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double dm : {0.0, -1.5, -3.0, -4.5}) {
        for (double ds : {-1.0, -3.0, -5.0, -7.0}) {
            const VarianceParams p{std::log(s2) + dm, std::log(s2 / ms_x) + ds};
            double ll = -std::numeric_limits<double>::infinity();
            try {
                ll = log_likelihood(model, p, init);
            } catch (const Error&) {
                continue;
            }
            if (ll > best_ll) {
                best_ll = ll;
                best = p;
            }
        }
    }
    return best;
}

MleResult fit_mle(const TvpModel& model, const VarianceParams& start, const MleOptions& options) {
    if (!std::isfinite(start.log_var_meas) || !std::isfinite(start.log_var_state)) {
        throw Error(ErrorKind::InvalidArgument, "starting log-variances must be finite");
    }
    const bool direct = options.parameterization == Parameterization::Variance;
    const std::size_t n_par = options.estimate_gamma ? 3 : 2;
    const StateInit init = options.init;

    auto to_theta = [&](std::span<const double> p) {
        std::vector<double> theta(p.begin(), p.end());
        if (direct) {
            theta[0] = std::log(p[0]);
            theta[1] = std::log(p[1]);
        }
        return theta;
    };

    optim::Objective objective;
    objective.value = [&](std::span<const double> p) {
        return loglik_at(model, to_theta(p), init);
    };
    objective.value_and_gradient = [&](std::span<const double> p, std::span<double> g) {
        const auto theta = to_theta(p);
        const double gamma = n_par > 2 ? theta[2] : model.gamma;
        Grad3 grad{};
        double ll = 0.0;
        try {
            ll = run_filter(model, std::exp(theta[0]), std::exp(theta[1]), gamma, init, nullptr, &grad);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonFiniteState) throw;
            std::fill(g.begin(), g.end(), 0.0);
            return -std::numeric_limits<double>::infinity();
        }
        for (std::size_t i = 0; i < n_par; ++i) g[i] = grad[i];
        if (direct) {
            g[0] /= p[0];
            g[1] /= p[1];
        }
        return ll;
    };

    std::vector<double> x0 = {start.log_var_meas, start.log_var_state};
    optim::BfgsOptions bopts;
    bopts.max_iter = options.max_iter;
    bopts.grad_tol = options.grad_tol;
    bopts.rel_tol = options.rel_tol;
    bopts.lower = {options.log_var_lower, options.log_var_lower};
    bopts.upper = {options.log_var_upper, options.log_var_upper};
    if (direct) {
        for (auto* v : {&x0, &bopts.lower, &bopts.upper}) {
            for (double& e : *v) e = std::exp(e);
        }
        bopts.max_step = std::numeric_limits<double>::infinity();
    }
    if (n_par > 2) {
        x0.push_back(model.gamma);
        bopts.lower.push_back(-std::numeric_limits<double>::infinity());
        bopts.upper.push_back(std::numeric_limits<double>::infinity());
    }

    const optim::BfgsResult opt = optim::maximize_bfgs(objective, x0, bopts);
    if (!opt.converged && !options.allow_nonconverged) {
        throw Error(ErrorKind::NoConvergence,
                    fmt::format("{} after {} iterations", opt.message, opt.iterations));
    }

    const std::vector<double> theta = to_theta(opt.x);
    TvpModel fitted = model;
    if (n_par > 2) fitted.gamma = theta[2];

    MleResult r;
    r.params = {theta[0], theta[1]};
    r.var_meas = variance_from_log(theta[0]);
    r.var_state = variance_from_log(theta[1]);
    r.gamma = fitted.gamma;
    r.n_iter = opt.iterations;
    r.converged = opt.converged;
    r.at_bound = opt.at_bound;
    r.message = opt.message;
    r.loglik_trace = opt.trace;
    r.n_params = n_par;

    const KalmanOutput out = kalman_filter(fitted, r.params, init);
    r.log_lik = out.log_lik;
    r.n_obs = model.size();
    r.n_diffuse = out.n_diffuse_dropped;
    r.final_state = out.filt_mean.back();
    r.final_rmse = std::sqrt(out.filt_var.back());
    r.final_z = r.final_state / r.final_rmse;
    const boost::math::normal_distribution<double> normal;
    auto two_sided = [&](double z) {
        return std::isfinite(z) ? 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(z)))
                                : std::numeric_limits<double>::quiet_NaN();
    };
    r.final_p = two_sided(r.final_z);
    r.next_state = out.next_mean();
    r.next_rmse = std::sqrt(out.next_var());
    const auto ic = regress::info_criteria(r.log_lik, n_par, r.n_obs);
    r.aic = ic.aic;
    r.sic = ic.sic;
    r.hq = ic.hq;

    const auto fdg = fd_gradient(fitted, r.params, init);
    r.fd_gradient_inf = std::max(std::abs(fdg[0]), std::abs(fdg[1]));

    // Sandwich covariance in theta space.
    const auto np = static_cast<Eigen::Index>(n_par);
    std::vector<double> steps(n_par);
    for (std::size_t i = 0; i < n_par; ++i) steps[i] = fd_step(theta[i]);
    auto f_at = [&](std::vector<double> th) { return loglik_at(model, th, init); };

    Eigen::MatrixXd hess(np, np);
    Eigen::MatrixXd scores(static_cast<Eigen::Index>(model.size()), np);
    try {
        const double f0 = r.log_lik;
        for (std::size_t i = 0; i < n_par; ++i) {
            auto tp = theta;
            auto tm = theta;
            tp[i] += steps[i];
            tm[i] -= steps[i];
            KalmanOutput op;
            KalmanOutput om;
            const double fp = loglik_at(model, tp, init, &op);
            const double fm = loglik_at(model, tm, init, &om);
            const auto ii = static_cast<Eigen::Index>(i);
            hess(ii, ii) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
            for (std::size_t t = 0; t < model.size(); ++t) {
                scores(static_cast<Eigen::Index>(t), ii) =
                    (op.loglik_terms[t] - om.loglik_terms[t]) / (2.0 * steps[i]);
            }
            for (std::size_t j = 0; j < i; ++j) {
                auto pp = theta;
                auto pm = theta;
                auto mp = theta;
                auto mm = theta;
                pp[i] += steps[i], pp[j] += steps[j];
                pm[i] += steps[i], pm[j] -= steps[j];
                mp[i] -= steps[i], mp[j] += steps[j];
                mm[i] -= steps[i], mm[j] -= steps[j];
                const double hij =
                    (f_at(pp) - f_at(pm) - f_at(mp) + f_at(mm)) / (4.0 * steps[i] * steps[j]);
                const auto jj = static_cast<Eigen::Index>(j);
                hess(ii, jj) = hij;
                hess(jj, ii) = hij;
            }
        }
    } catch (const Error&) {
        hess.setConstant(std::numeric_limits<double>::quiet_NaN());
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd se = Eigen::VectorXd::Constant(np, nan);
    if (hess.allFinite()) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(hess);
        if (lu.isInvertible()) {
            const Eigen::MatrixXd h_inv = lu.inverse();
            const Eigen::MatrixXd g = scores.transpose() * scores;
            const Eigen::MatrixXd cov = h_inv * g * h_inv;
            for (Eigen::Index i = 0; i < np; ++i) {
                if (cov(i, i) > 0.0) se(i) = std::sqrt(cov(i, i));
            }
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        r.robust_se[i] = se(static_cast<Eigen::Index>(i));
        r.z_stats[i] = theta[i] / r.robust_se[i];
        r.p_values[i] = two_sided(r.z_stats[i]);
    }
    if (n_par > 2) r.gamma_se = se(2);
    return r;
}

ShockSeries innovation_shocks(const KalmanOutput& output) {
    std::vector<double> z(output.innovations.size());
    for (std::size_t t = 0; t < z.size(); ++t) {
        z[t] = output.innovations[t] / std::sqrt(output.innov_var[t]);
    }
    return {MonthlySeries(output.start, std::move(z), "shock"), output.n_diffuse_dropped};
}

}  // namespace tvp::sspace
