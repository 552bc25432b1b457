#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tvp/error.hpp"
#include "tvp/regress.hpp"
#include "tvp/series.hpp"
#include "tvp/sspace.hpp"
#include "tvp/unitroot.hpp"

namespace tvp::pipeline {

/// Error annotated with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Growth rates in percent (x100) or as fractions.
enum class GrowthUnits { Percent, Fraction };
/// Series the unit-root table is computed on.
enum class AdfTarget { LogLevels, Growth };
enum class StatePath { OneStep, Filtered, Smoothed };

[[nodiscard]] GrowthUnits parse_growth_units(std::string_view text);
[[nodiscard]] AdfTarget parse_adf_target(std::string_view text);
[[nodiscard]] StatePath parse_state_path(std::string_view text);
[[nodiscard]] std::string_view to_string(GrowthUnits u) noexcept;
[[nodiscard]] std::string_view to_string(AdfTarget t) noexcept;
[[nodiscard]] std::string_view to_string(StatePath p) noexcept;

struct PipelineConfig {
    GrowthMode growth_mode = GrowthMode::LogDiff;
    GrowthUnits growth_units = GrowthUnits::Percent;
    AdfTarget adf_target = AdfTarget::LogLevels;
    unitroot::AdfSpec adf_levels{unitroot::Deterministic::ConstantTrend, -1, unitroot::LagSelection::Schwarz};
    unitroot::AdfSpec adf_differences{unitroot::Deterministic::Constant, -1, unitroot::LagSelection::Schwarz};
    double cusum_significance = 0.05;
    /// Empty: every December whose expanding window covers at least half the
    /// sample, plus the final month.
    std::vector<MonthDate> subsample_end_dates;
    /// Demean each sub-sample with the full-sample mean instead of its own.
    bool subsample_full_sample_mean = false;
    sspace::MleOptions mle;
    StatePath decade_source = StatePath::Filtered;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Minimum number of monthly observations the unit-root stage accepts.
inline constexpr std::size_t kMinPipelineMonths = 60;

struct AdfRow {
    std::string variable;
    std::string transform;  ///< "levels" or "first difference"
    unitroot::AdfResult result;
};

struct SubSampleRow {
    MonthDate sample_start;
    MonthDate sample_end;
    double final_state = 0.0;
    double final_rmse = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    double log_var_meas = 0.0;
    double log_var_state = 0.0;
    double log_lik = 0.0;
    bool converged = false;
    bool at_bound = false;
    std::string message;
};

struct StatePaths {
    MonthDate start;
    std::vector<double> onestep;
    std::vector<double> onestep_rmse;
    std::vector<double> filtered;
    std::vector<double> filtered_rmse;
    std::vector<double> smoothed;
    std::vector<double> smoothed_rmse;
};

struct Provenance {
    std::string data_hash;    ///< FNV-1a 64 of the canonical CSV
    std::string config_hash;  ///< FNV-1a 64 of the canonical config JSON
    std::string generated_at;
    std::string version;
};

struct Report {
    PipelineConfig config;
    Provenance provenance;
    std::string y_name;
    std::string x_name;
    MonthDate sample_start;
    MonthDate sample_end;
    std::size_t n_obs = 0;
    std::vector<AdfRow> adf_table;
    double y_mean = 0.0;
    double x_mean = 0.0;
    std::optional<MonthlySeries> y_demeaned;
    std::optional<MonthlySeries> x_demeaned;
    regress::OlsResult ols_table;
    regress::CusumResult cusum_result;
    regress::RecursivePath recursive_path;
    sspace::MleResult mle_result;
    StatePaths state_paths;
    std::vector<DecadeAverage> decade_averages;
    std::optional<sspace::ShockSeries> shock_series;
    std::optional<std::vector<SubSampleRow>> subsample_table;
    /// Sections that were not produced, with the reason.
    std::map<std::string, std::string> skipped;
};

/// transform -> unit roots -> demean -> OLS, CUSUM, recursive coefficients ->
/// state-space MLE -> state paths, decade averages, shocks -> sub-samples.
/// Errors are rethrown as StageError.
[[nodiscard]] Report run_pipeline(const Dataset& data, const PipelineConfig& cfg = {});

/// Growth series (y, x) as used by the estimators, before demeaning.
[[nodiscard]] std::pair<MonthlySeries, MonthlySeries> growth_series(const Dataset& data,
                                                                    const PipelineConfig& cfg);

[[nodiscard]] std::vector<MonthDate> default_subsample_ends(MonthDate start, MonthDate end);

/// Expanding-window final states. Each window starts at the first growth
/// observation; failures are recorded in the row.
[[nodiscard]] std::vector<SubSampleRow> subsample_final_states(const Dataset& data,
                                                               const std::vector<MonthDate>& end_dates,
                                                               const PipelineConfig& cfg = {});

// ------------------------------------------------------------ tabular output

using Cell = std::variant<std::string, double>;

struct Tabular {
    std::string file_name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class FigureId { Cusum = 3, Recursive = 4, StatePath = 5, Decades = 6, Subsamples = 7, Shocks = 8 };
enum class TableId { Adf, Ols, StateSpace, SubsampleAppendix };

[[nodiscard]] FigureId parse_figure_id(std::string_view text);

/// Plot-ready data; throws SectionMissing when the section was skipped.
[[nodiscard]] Tabular emit_figure_data(const Report& report, FigureId which);
[[nodiscard]] Tabular emit_table(const Report& report, TableId which);

}  // namespace tvp::pipeline
