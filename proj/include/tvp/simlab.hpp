#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tvp/series.hpp"
#include "tvp/sspace.hpp"
#include "tvp/unitroot.hpp"

namespace tvp::simlab {

/// xoshiro256** seeded through splitmix64, so streams can be reproduced from
/// the seed in any language:
///   state[i] = splitmix64(seed) for i = 0..3 (successive outputs),
///   uniform  = ((next() >> 11) + 0.5) * 2^-53, in (0, 1),
///   normal   = Box-Muller on two uniforms, cosine branch first, sine branch cached.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next() noexcept;
    double uniform() noexcept;
    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

private:
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Seed for replication `rep` of a study seeded with `seed`: seed XOR rep.
[[nodiscard]] constexpr std::uint64_t rep_seed(std::uint64_t seed, std::uint64_t rep) noexcept {
    return seed ^ rep;
}

struct XProcess {
    enum class Kind { IidNormal, Ar1, Constant };
    Kind kind = Kind::IidNormal;
    double mean = 0.0;
    double var = 1.0;  ///< innovation variance for Ar1
    double phi = 0.0;
};

struct TvpDgp {
    std::size_t n_obs = 543;
    double sigma2_meas = 0.016;
    double sigma2_state = 0.359;
    double alpha0 = 0.0;
    XProcess x;
    std::uint64_t seed = 1;
    MonthDate start{1971, 1};
};

struct TvpSample {
    MonthlySeries y;
    MonthlySeries x;
    std::vector<double> alpha;  ///< true state path
};

/// alpha_t = alpha_{t-1} + N(0, sigma2_state) from alpha_0, then
/// y_t = x_t alpha_t + N(0, sigma2_meas).
[[nodiscard]] TvpSample gen_tvp(const TvpDgp& dgp);

/// X_t = X_{t-1} + drift + N(0, sigma^2), X_0 = 0.
[[nodiscard]] MonthlySeries gen_unit_root(std::size_t n_obs, double drift, std::uint64_t seed,
                                          double sigma = 1.0);
/// Stationary AR(1) started from its stationary distribution.
[[nodiscard]] MonthlySeries gen_ar1(std::size_t n_obs, double phi, std::uint64_t seed,
                                    double sigma = 1.0);

/// y_t = beta_t x_t + N(0, noise_var) with x_t ~ N(x_mean, x_var) and
/// beta_t switching from beta_before to beta_after at floor(break_fraction*T).
struct RegressionDgp {
    std::size_t n_obs = 500;
    double beta_before = 1.0;
    double beta_after = 1.0;
    double break_fraction = 0.5;
    double x_mean = 1.0;
    double x_var = 1.0;
    double noise_var = 1.0;
    std::uint64_t seed = 1;
};

struct RegressionSample {
    MonthlySeries y;
    MonthlySeries x;
};

[[nodiscard]] RegressionSample gen_regression(const RegressionDgp& dgp);

// ------------------------------------------------------------- Monte Carlo

struct MleStudy {
    TvpDgp dgp;
    sspace::MleOptions options;
};

struct AdfStudy {
    enum class Process { RandomWalk, Ar1 };
    Process process = Process::RandomWalk;
    std::size_t n_obs = 500;
    double phi = 0.5;    ///< Ar1 only
    double drift = 0.0;  ///< RandomWalk only
    unitroot::AdfSpec spec;
    double level = 0.05;
};

struct CusumStudy {
    RegressionDgp dgp;
    double significance = 0.05;
};

using Study = std::variant<MleStudy, AdfStudy, CusumStudy>;

struct ParamSummary {
    std::string name;
    double truth = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double coverage95 = 0.0;  ///< share of estimate +- 1.96 se intervals covering truth
};

struct RepRecord {
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    bool rejected = false;
    std::vector<double> estimates;
    std::vector<double> std_errs;
    double fd_gradient_inf = 0.0;
    std::string message;
};

struct McSummary {
    std::string estimator;
    std::size_t n_reps = 0;
    std::size_t n_failed = 0;
    std::uint64_t seed = 0;
    std::vector<ParamSummary> params;
    std::optional<double> rejection_rate;
    std::optional<double> max_fd_gradient;
    std::vector<RepRecord> reps;  ///< filled only when requested
};

/// Runs n_reps independent replications (seed XOR rep) concurrently and
/// aggregates in replication order. Failed replications are counted, not fatal.
[[nodiscard]] McSummary monte_carlo(const Study& study, std::size_t n_reps, std::uint64_t seed,
                                    bool keep_reps = false, unsigned threads = 0);

}  // namespace tvp::simlab
