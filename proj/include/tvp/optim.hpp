#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tvp::optim {

/// Objective to maximize. `gradient` writes df/dx into its second argument and
/// returns f.
struct Objective {
    std::function<double(std::span<const double>)> value;
    std::function<double(std::span<const double>, std::span<double>)> value_and_gradient;
};

struct BfgsOptions {
    int max_iter = 500;
    double grad_tol = 1e-6;
    /// Relative improvement below which an iteration counts as stalled; three
    /// consecutive stalls end the run as converged.
    double rel_tol = 1e-9;
    int stall_limit = 3;
    /// Largest allowed change of any coordinate in one step.
    double max_step = 5.0;
    std::vector<double> lower;  ///< empty: unbounded
    std::vector<double> upper;
};

struct BfgsResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<double> gradient;
    int iterations = 0;
    int marquardt_resets = 0;
    bool converged = false;
    bool at_bound = false;
    std::vector<double> trace;  ///< objective at every accepted iterate, starting with x0
    std::string message;
};

/// Bound-constrained quasi-Newton ascent: BFGS inverse-Hessian updates with an
/// Armijo backtracking line search on the projected path. When the BFGS
/// direction is not an ascent direction, or the line search fails, the inverse
/// Hessian is rebuilt from a finite-difference Hessian with Marquardt damping.
[[nodiscard]] BfgsResult maximize_bfgs(const Objective& objective, std::vector<double> x0,
                                       const BfgsOptions& options = {});

/// Central-difference Hessian of the gradient, symmetrized.
[[nodiscard]] std::vector<double> fd_hessian_from_gradient(const Objective& objective,
                                                           std::span<const double> x,
                                                           std::span<const double> steps);

}  // namespace tvp::optim
