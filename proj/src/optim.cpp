#include "tvp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tvp/error.hpp"

namespace tvp::optim {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

double eval_grad(const Objective& obj, const Vec& x, Vec& g) {
    g.resize(x.size());
    return obj.value_and_gradient(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                                  std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec fd_steps(const Vec& x) {
    Vec h(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) h(i) = 1e-4 * std::max(1.0, std::abs(x(i)));
    return h;
}

/// Inverse of -H + lambda*I for the smallest lambda (from a geometric ladder)
/// that makes the damped matrix safely positive definite.
Mat marquardt_inverse(const Mat& hessian) {
    const Eigen::Index n = hessian.rows();
    Mat m = -0.5 * (hessian + hessian.transpose());
    const double scale = std::max(1e-12, m.diagonal().cwiseAbs().maxCoeff());
    double lambda = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
        Mat damped = m + lambda * Mat::Identity(n, n);
        Eigen::SelfAdjointEigenSolver<Mat> eig(damped);
        if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 1e-10 * scale) {
            return damped.inverse();
        }
        lambda = lambda == 0.0 ? 1e-6 * scale : lambda * 10.0;
    }
    return Mat::Identity(n, n) / scale;
}

}  // namespace

std::vector<double> fd_hessian_from_gradient(const Objective& objective, std::span<const double> x,
                                             std::span<const double> steps) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Vec base = Eigen::Map<const Vec>(x.data(), n);
    Mat h(n, n);
    Vec gp;
    Vec gm;
    for (Eigen::Index j = 0; j < n; ++j) {
        Vec xp = base;
        Vec xm = base;
        xp(j) += steps[static_cast<std::size_t>(j)];
        xm(j) -= steps[static_cast<std::size_t>(j)];
        eval_grad(objective, xp, gp);
        eval_grad(objective, xm, gm);
        h.col(j) = (gp - gm) / (2.0 * steps[static_cast<std::size_t>(j)]);
    }
    Mat sym = 0.5 * (h + h.transpose());
    return {sym.data(), sym.data() + sym.size()};
}

BfgsResult maximize_bfgs(const Objective& objective, std::vector<double> x0, const BfgsOptions& options) {
    const auto n = static_cast<Eigen::Index>(x0.size());
    Vec lo = options.lower.empty() ? Vec::Constant(n, -std::numeric_limits<double>::infinity())
                                   : to_vec(options.lower);
    Vec hi = options.upper.empty() ? Vec::Constant(n, std::numeric_limits<double>::infinity())
                                   : to_vec(options.upper);
    auto clip = [&](Vec v) {
        return v.cwiseMax(lo).cwiseMin(hi).eval();
    };

    BfgsResult res;
    Vec x = clip(to_vec(x0));
    Vec g;
    double f = eval_grad(objective, x, g);
    if (!std::isfinite(f) || !g.allFinite()) {
        throw Error(ErrorKind::NonFiniteObjective, "objective is not finite at the starting point");
    }
    res.trace.push_back(f);

    auto rebuild = [&]() {
        const Vec steps = fd_steps(x);
        const auto flat = fd_hessian_from_gradient(
            objective, std::span<const double>(x.data(), static_cast<std::size_t>(n)),
            std::span<const double>(steps.data(), static_cast<std::size_t>(n)));
        Mat hess = Eigen::Map<const Mat>(flat.data(), n, n);
        if (!hess.allFinite()) return Mat(Mat::Identity(n, n));
        ++res.marquardt_resets;
        return marquardt_inverse(hess);
    };

    Mat inv_hess = rebuild();
    int stalls = 0;
    bool just_rebuilt = true;

    auto active_mask = [&](const Vec& xv, const Vec& gv) {
        std::vector<bool> active(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            active[static_cast<std::size_t>(i)] =
                (xv(i) <= lo(i) && gv(i) < 0.0) || (xv(i) >= hi(i) && gv(i) > 0.0);
        }
        return active;
    };

    for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
        const auto active = active_mask(x, g);
        Vec pg = g;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (active[static_cast<std::size_t>(i)]) pg(i) = 0.0;
        }
        if (pg.lpNorm<Eigen::Infinity>() < options.grad_tol) {
            res.converged = true;
            res.message = "projected gradient below tolerance";
            break;
        }

        // Ascent direction restricted to the free coordinates.
        Vec d = Vec::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (active[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!active[static_cast<std::size_t>(j)]) d(i) += inv_hess(i, j) * g(j);
            }
        }
        if (!(g.dot(d) > 0.0) || !d.allFinite()) {
            if (!just_rebuilt) {
                inv_hess = rebuild();
                just_rebuilt = true;
                --res.iterations;
                continue;
            }
            d = pg;
        }

        double alpha = 1.0;
        const double biggest = d.lpNorm<Eigen::Infinity>();
        if (biggest * alpha > options.max_step) alpha = options.max_step / biggest;

        constexpr double c1 = 1e-4;
        bool accepted = false;
        Vec x_new;
        Vec g_new;
        double f_new = f;
        for (int k = 0; k < 60; ++k) {
            x_new = clip(x + alpha * d);
            const Vec step = x_new - x;
            if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
            f_new = eval_grad(objective, x_new, g_new);
            if (std::isfinite(f_new) && g_new.allFinite() && f_new >= f + c1 * g.dot(step)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }

        if (!accepted) {
            if (!just_rebuilt) {
                inv_hess = rebuild();
                just_rebuilt = true;
                --res.iterations;
                continue;
            }
            // A fresh Newton step that cannot raise f only means we are at the
            // rounding floor if the predicted gain is itself negligible.
            if (0.5 * g.dot(d) <= options.rel_tol * std::max(1.0, std::abs(f))) {
                res.converged = true;
                res.message = "no representable improvement; predicted gain below tolerance";
            } else {
                res.message = "line search failed";
            }
            break;
        }
        just_rebuilt = false;

        const Vec s = x_new - x;
        const Vec y = -(g_new - g);  // gradient change of the minimized function -f
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Mat eye = Mat::Identity(n, n);
            inv_hess = (eye - rho * s * y.transpose()) * inv_hess * (eye - rho * y * s.transpose()) +
                       rho * s * s.transpose();
        }

        const double improvement = f_new - f;
        x = x_new;
        g = g_new;
        f = f_new;
        res.trace.push_back(f);

        if (improvement <= options.rel_tol * std::max(1.0, std::abs(f))) {
            if (++stalls >= options.stall_limit) {
                res.converged = true;
                res.message = "relative improvement below tolerance";
                ++res.iterations;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    if (res.message.empty()) res.message = "iteration limit reached";

    const auto active = active_mask(x, g);
    res.at_bound = std::any_of(active.begin(), active.end(), [](bool b) { return b; });
    res.x = to_std(x);
    res.value = f;
    res.gradient = to_std(g);
    return res;
}

}  // namespace tvp::optim
