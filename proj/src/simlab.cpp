#include "tvp/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tvp/error.hpp"
#include "tvp/parallel.hpp"
#include "tvp/regress.hpp"

namespace tvp::simlab {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

// ---------------------------------------------------------------- generators

TvpSample gen_tvp(const TvpDgp& dgp) {
    require(dgp.n_obs >= 2, "TvpDgp needs n_obs >= 2");
    require(dgp.sigma2_meas > 0.0 && dgp.sigma2_state > 0.0, "TvpDgp variances must be positive");
    require(dgp.x.kind != XProcess::Kind::Ar1 || std::abs(dgp.x.phi) < 1.0, "AR(1) regressor needs |phi| < 1");
    require(dgp.x.var >= 0.0, "regressor variance must be non-negative");

    Rng rng(dgp.seed);
    const std::size_t n = dgp.n_obs;
    std::vector<double> x(n);
    std::vector<double> y(n);
    std::vector<double> alpha(n);
    const double sd_x = std::sqrt(dgp.x.var);
    const double sd_meas = std::sqrt(dgp.sigma2_meas);
    const double sd_state = std::sqrt(dgp.sigma2_state);

    double ar_dev = 0.0;
    if (dgp.x.kind == XProcess::Kind::Ar1) {
        ar_dev = rng.normal(0.0, sd_x / std::sqrt(1.0 - dgp.x.phi * dgp.x.phi));
    }
    double a = dgp.alpha0;
    for (std::size_t t = 0; t < n; ++t) {
        switch (dgp.x.kind) {
            case XProcess::Kind::IidNormal: x[t] = rng.normal(dgp.x.mean, sd_x); break;
            case XProcess::Kind::Ar1:
                if (t > 0) ar_dev = dgp.x.phi * ar_dev + rng.normal(0.0, sd_x);
                x[t] = dgp.x.mean + ar_dev;
                break;
            case XProcess::Kind::Constant: x[t] = dgp.x.mean; break;
        }
        a += rng.normal(0.0, sd_state);
        alpha[t] = a;
        y[t] = x[t] * a + rng.normal(0.0, sd_meas);
    }
    return {MonthlySeries(dgp.start, std::move(y), "y"), MonthlySeries(dgp.start, std::move(x), "x"),
            std::move(alpha)};
}

MonthlySeries gen_unit_root(std::size_t n_obs, double drift, std::uint64_t seed, double sigma) {
    require(n_obs >= 25, "unit-root generator needs n_obs >= 25");
    Rng rng(seed);
    std::vector<double> v(n_obs);
    double level = 0.0;
    for (auto& e : v) {
        level += drift + rng.normal(0.0, sigma);
        e = level;
    }
    return {MonthDate(2000, 1), std::move(v), "random_walk"};
}

MonthlySeries gen_ar1(std::size_t n_obs, double phi, std::uint64_t seed, double sigma) {
    require(n_obs >= 25, "AR(1) generator needs n_obs >= 25");
    require(std::abs(phi) < 1.0, "AR(1) generator needs |phi| < 1");
    Rng rng(seed);
    std::vector<double> v(n_obs);
    double level = rng.normal(0.0, sigma / std::sqrt(1.0 - phi * phi));
    v[0] = level;
    for (std::size_t t = 1; t < n_obs; ++t) {
        level = phi * level + rng.normal(0.0, sigma);
        v[t] = level;
    }
    return {MonthDate(2000, 1), std::move(v), "ar1"};
}

RegressionSample gen_regression(const RegressionDgp& dgp) {
    require(dgp.n_obs >= 3, "regression DGP needs n_obs >= 3");
    require(dgp.x_var >= 0.0 && dgp.noise_var > 0.0, "regression DGP variances invalid");
    Rng rng(dgp.seed);
    const auto brk = static_cast<std::size_t>(std::floor(dgp.break_fraction * static_cast<double>(dgp.n_obs)));
    std::vector<double> x(dgp.n_obs);
    std::vector<double> y(dgp.n_obs);
    for (std::size_t t = 0; t < dgp.n_obs; ++t) {
        x[t] = rng.normal(dgp.x_mean, std::sqrt(dgp.x_var));
        const double beta = t < brk ? dgp.beta_before : dgp.beta_after;
        y[t] = beta * x[t] + rng.normal(0.0, std::sqrt(dgp.noise_var));
    }
    return {MonthlySeries(MonthDate(2000, 1), std::move(y), "y"),
            MonthlySeries(MonthDate(2000, 1), std::move(x), "x")};
}

// --------------------------------------------------------------- Monte Carlo

namespace {

RepRecord run_rep(const MleStudy& study, RepRecord rec) {
    TvpDgp dgp = study.dgp;
    dgp.seed = rec.seed;
    const TvpSample sample = gen_tvp(dgp);
    const auto model = sspace::TvpModel::from_series(sample.y, sample.x);
    sspace::MleOptions opts = study.options;
    opts.allow_nonconverged = true;
    const auto fit = sspace::fit_mle(model, sspace::default_start(model, opts.init), opts);
    rec.estimates = {fit.params.log_var_meas, fit.params.log_var_state};
    rec.std_errs = {fit.robust_se[0], fit.robust_se[1]};
    rec.fd_gradient_inf = fit.fd_gradient_inf;
    rec.ok = fit.converged;
    if (!fit.converged) rec.message = fit.message;
    return rec;
}

RepRecord run_rep(const AdfStudy& study, RepRecord rec) {
    const MonthlySeries s = study.process == AdfStudy::Process::RandomWalk
                                ? gen_unit_root(study.n_obs, study.drift, rec.seed)
                                : gen_ar1(study.n_obs, study.phi, rec.seed);
    const auto r = unitroot::adf(s, study.spec);
    rec.estimates = {r.statistic, static_cast<double>(r.chosen_lags)};
    rec.rejected = r.reject_at.has_value() && *r.reject_at <= study.level + 1e-12;
    rec.ok = true;
    return rec;
}

RepRecord run_rep(const CusumStudy& study, RepRecord rec) {
    RegressionDgp dgp = study.dgp;
    dgp.seed = rec.seed;
    const auto sample = gen_regression(dgp);
    const auto r = regress::cusum(sample.y, sample.x, study.significance);
    rec.rejected = !r.stable;
    rec.estimates = {r.statistic.back()};
    rec.ok = true;
    return rec;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

McSummary monte_carlo(const Study& study, std::size_t n_reps, std::uint64_t seed, bool keep_reps,
                      unsigned threads) {
    if (n_reps < 10) throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least 10 replications");

    std::vector<RepRecord> reps(n_reps);
    parallel_for(
        n_reps,
        [&](std::size_t r) {
            RepRecord rec;
            rec.rep = r;
            rec.seed = rep_seed(seed, r);
            try {
                reps[r] = std::visit([&](const auto& s) { return run_rep(s, rec); }, study);
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.message = e.what();
                reps[r] = rec;
            }
        },
        threads);

    McSummary sum;
    sum.n_reps = n_reps;
    sum.seed = seed;
    for (const auto& r : reps) {
        if (!r.ok) ++sum.n_failed;
    }
    const std::size_t n_ok = n_reps - sum.n_failed;

    if (const auto* mle = std::get_if<MleStudy>(&study)) {
        sum.estimator = "mle";
        const std::array<std::pair<const char*, double>, 2> truths = {
            std::pair{"log_var_meas", std::log(mle->dgp.sigma2_meas)},
            std::pair{"log_var_state", std::log(mle->dgp.sigma2_state)}};
        double max_grad = 0.0;
        for (std::size_t p = 0; p < truths.size(); ++p) {
            ParamSummary ps;
            ps.name = truths[p].first;
            ps.truth = truths[p].second;
            std::vector<double> est;
            double sq = 0.0;
            std::size_t covered = 0;
            for (const auto& r : reps) {
                if (!r.ok) continue;
                const double e = r.estimates[p];
                est.push_back(e);
                ps.mean += e;
                sq += (e - ps.truth) * (e - ps.truth);
                const double se = r.std_errs[p];
                if (std::isfinite(se) && std::abs(e - ps.truth) <= 1.96 * se) ++covered;
                max_grad = std::max(max_grad, r.fd_gradient_inf);
            }
            if (n_ok > 0) {
                ps.mean /= static_cast<double>(n_ok);
                ps.bias = ps.mean - ps.truth;
                ps.rmse = std::sqrt(sq / static_cast<double>(n_ok));
                ps.coverage95 = static_cast<double>(covered) / static_cast<double>(n_ok);
            }
            ps.median = median_of(est);
            sum.params.push_back(ps);
        }
        sum.max_fd_gradient = max_grad;
    } else {
        sum.estimator = std::holds_alternative<AdfStudy>(study) ? "adf" : "cusum";
        std::size_t rejected = 0;
        for (const auto& r : reps) {
            if (r.ok && r.rejected) ++rejected;
        }
        sum.rejection_rate = n_ok > 0 ? static_cast<double>(rejected) / static_cast<double>(n_ok) : 0.0;
    }
    if (keep_reps) sum.reps = std::move(reps);
    return sum;
}

}  // namespace tvp::simlab
