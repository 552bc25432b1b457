#include "tvp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <fmt/format.h>

#include "tvp/parallel.hpp"
#include "tvp/report_io.hpp"

namespace tvp::pipeline {

GrowthUnits parse_growth_units(std::string_view text) {
    if (text == "percent") return GrowthUnits::Percent;
    if (text == "fraction") return GrowthUnits::Fraction;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown growth units '{}'", text));
}

AdfTarget parse_adf_target(std::string_view text) {
    if (text == "log-levels") return AdfTarget::LogLevels;
    if (text == "growth") return AdfTarget::Growth;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown ADF target '{}'", text));
}

StatePath parse_state_path(std::string_view text) {
    if (text == "onestep") return StatePath::OneStep;
    if (text == "filtered") return StatePath::Filtered;
    if (text == "smoothed") return StatePath::Smoothed;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown state path '{}'", text));
}

std::string_view to_string(GrowthUnits u) noexcept { return u == GrowthUnits::Percent ? "percent" : "fraction"; }
std::string_view to_string(AdfTarget t) noexcept { return t == AdfTarget::LogLevels ? "log-levels" : "growth"; }
std::string_view to_string(StatePath p) noexcept {
    switch (p) {
        case StatePath::OneStep: return "onestep";
        case StatePath::Filtered: return "filtered";
        case StatePath::Smoothed: return "smoothed";
    }
    return "?";
}

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SubSampleRow fit_window(const MonthlySeries& y_growth, const MonthlySeries& x_growth, double y_mean,
                        double x_mean, MonthDate end, const PipelineConfig& cfg) {
    SubSampleRow row;
    row.sample_start = y_growth.start();
    row.sample_end = end;
    try {
        const MonthlySeries yw = window(y_growth, y_growth.start(), end);
        const MonthlySeries xw = window(x_growth, x_growth.start(), end);
        auto shifted = [](const MonthlySeries& s, double mean) {
            std::vector<double> v(s.values().begin(), s.values().end());
            for (double& e : v) e -= mean;
            return MonthlySeries(s.start(), std::move(v), s.name());
        };
        const MonthlySeries yd = cfg.subsample_full_sample_mean ? shifted(yw, y_mean) : demean(yw).first;
        const MonthlySeries xd = cfg.subsample_full_sample_mean ? shifted(xw, x_mean) : demean(xw).first;
        const auto model = sspace::TvpModel::from_series(yd, xd);
        sspace::MleOptions opts = cfg.mle;
        opts.allow_nonconverged = true;
        const auto fit = sspace::fit_mle(model, sspace::default_start(model, opts.init), opts);
        row.final_state = fit.final_state;
        row.final_rmse = fit.final_rmse;
        row.z = fit.final_z;
        row.p_value = fit.final_p;
        row.log_var_meas = fit.params.log_var_meas;
        row.log_var_state = fit.params.log_var_state;
        row.log_lik = fit.log_lik;
        row.converged = fit.converged;
        row.at_bound = fit.at_bound;
        if (!fit.converged || fit.at_bound) row.message = fit.message;
    } catch (const Error& e) {
        row.converged = false;
        row.message = e.what();
    }
    return row;
}

std::vector<SubSampleRow> subsample_rows(const MonthlySeries& y_growth, const MonthlySeries& x_growth,
                                         const std::vector<MonthDate>& ends, const PipelineConfig& cfg) {
    for (std::size_t i = 0; i < ends.size(); ++i) {
        if (i > 0 && !(ends[i - 1] < ends[i])) {
            throw Error(ErrorKind::InvalidArgument, "sub-sample end dates must be strictly increasing");
        }
        if (ends[i] > y_growth.end() || y_growth.start().months_until(ends[i]) < 24) {
            throw Error(ErrorKind::OutOfRange,
                        fmt::format("sub-sample end {} must lie in {}..{} and 24+ months after the start",
                                    ends[i].iso(), y_growth.start().iso(), y_growth.end().iso()));
        }
    }
    const double y_mean = demean(y_growth).second;
    const double x_mean = demean(x_growth).second;
    std::vector<SubSampleRow> rows(ends.size());
    parallel_for(
        ends.size(),
        [&](std::size_t i) { rows[i] = fit_window(y_growth, x_growth, y_mean, x_mean, ends[i], cfg); },
        cfg.threads);
    return rows;
}

}  // namespace

std::pair<MonthlySeries, MonthlySeries> growth_series(const Dataset& data, const PipelineConfig& cfg) {
    const double factor = cfg.growth_units == GrowthUnits::Percent ? 1.0 : 0.01;
    MonthlySeries y = yoy_growth(data.y_raw(), cfg.growth_mode);
    MonthlySeries x = yoy_growth(data.x_raw(), cfg.growth_mode);
    if (factor != 1.0) {
        y = scaled(y, factor);
        x = scaled(x, factor);
    }
    return {std::move(y), std::move(x)};
}

std::vector<MonthDate> default_subsample_ends(MonthDate start, MonthDate end) {
    std::vector<MonthDate> out;
    const long span = start.months_until(end) + 1;
    const long min_len = std::max<long>(25, (span + 1) / 2);
    for (MonthDate d = start; d < end; d = d.plus_months(1)) {
        if (d.month() == 12 && start.months_until(d) + 1 >= min_len) out.push_back(d);
    }
    if (start.months_until(end) >= 24) out.push_back(end);
    return out;
}

std::vector<SubSampleRow> subsample_final_states(const Dataset& data, const std::vector<MonthDate>& end_dates,
                                                 const PipelineConfig& cfg) {
    const auto [y, x] = growth_series(data, cfg);
    return subsample_rows(y, x, end_dates, cfg);
}

Report run_pipeline(const Dataset& data, const PipelineConfig& cfg) {
    Report rep;
    rep.config = cfg;
    rep.y_name = data.y_raw().name();
    rep.x_name = data.x_raw().name();
    rep.provenance.version = PROJECT_VERSION_STRING;
    rep.provenance.generated_at = utc_timestamp();
    {
        std::ostringstream csv;
        write_csv(csv, data);
        rep.provenance.data_hash = fnv1a_hex(csv.str());
        rep.provenance.config_hash = fnv1a_hex(config_to_json(cfg).dump());
    }

    const auto [y_growth, x_growth] = staged("transform", [&] { return growth_series(data, cfg); });

    rep.adf_table = staged("adf", [&] {
        if (data.size() < kMinPipelineMonths) {
            throw Error(ErrorKind::TooShort,
                        fmt::format("need at least {} monthly observations, have {}", kMinPipelineMonths,
                                    data.size()));
        }
        std::vector<AdfRow> rows;
        const std::array<std::pair<const MonthlySeries*, const MonthlySeries*>, 2> vars = {
            std::pair{&data.y_raw(), &y_growth}, std::pair{&data.x_raw(), &x_growth}};
        for (const auto& [raw, growth] : vars) {
            const MonthlySeries levels = cfg.adf_target == AdfTarget::LogLevels ? log_levels(*raw) : *growth;
            rows.push_back({raw->name(), "levels", unitroot::adf(levels, cfg.adf_levels)});
            rows.push_back({raw->name(), "first difference",
                            unitroot::adf(first_difference(levels), cfg.adf_differences)});
        }
        return rows;
    });

    auto [y_dm, y_mean] = staged("demean", [&] { return demean(y_growth); });
    auto [x_dm, x_mean] = staged("demean", [&] { return demean(x_growth); });
    rep.y_mean = y_mean;
    rep.x_mean = x_mean;
    rep.sample_start = y_dm.start();
    rep.sample_end = y_dm.end();
    rep.n_obs = y_dm.size();

    rep.ols_table = staged("ols", [&] { return regress::ols_no_intercept(y_dm, x_dm); });
    rep.cusum_result = staged("cusum", [&] { return regress::cusum(y_dm, x_dm, cfg.cusum_significance); });
    rep.recursive_path = staged("recursive", [&] { return regress::recursive_coefficients(y_dm, x_dm); });

    const auto model = sspace::TvpModel::from_series(y_dm, x_dm);
    rep.mle_result = staged("sspace", [&] {
        return sspace::fit_mle(model, sspace::default_start(model, cfg.mle.init), cfg.mle);
    });

    staged("states", [&] {
        sspace::TvpModel fitted = model;
        fitted.gamma = rep.mle_result.gamma;
        const auto out = sspace::kalman_filter(fitted, rep.mle_result.params, cfg.mle.init);
        const auto smooth = sspace::kalman_smoother(fitted, rep.mle_result.params, out);
        StatePaths& sp = rep.state_paths;
        sp.start = model.start;
        sp.onestep = out.pred_mean;
        sp.filtered = out.filt_mean;
        sp.smoothed = smooth.means;
        auto roots = [](const std::vector<double>& v) {
            std::vector<double> r(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) r[i] = std::sqrt(v[i]);
            return r;
        };
        sp.onestep_rmse = roots(out.pred_var);
        sp.filtered_rmse = roots(out.filt_var);
        sp.smoothed_rmse = roots(smooth.vars);

        const std::vector<double>& source = cfg.decade_source == StatePath::OneStep    ? sp.onestep
                                            : cfg.decade_source == StatePath::Smoothed ? sp.smoothed
                                                                                       : sp.filtered;
        rep.decade_averages = decade_averages(MonthlySeries(sp.start, source, "state"));
        rep.shock_series = sspace::innovation_shocks(out);
        return 0;
    });

    rep.y_demeaned = std::move(y_dm);
    rep.x_demeaned = std::move(x_dm);

    const std::vector<MonthDate> ends = cfg.subsample_end_dates.empty()
                                            ? default_subsample_ends(y_growth.start(), y_growth.end())
                                            : cfg.subsample_end_dates;
    if (ends.empty()) {
        rep.skipped["subsample_table"] = "sample shorter than 25 months; no expanding windows";
    } else {
        rep.subsample_table = staged("subsample", [&] { return subsample_rows(y_growth, x_growth, ends, cfg); });
    }
    return rep;
}

// ------------------------------------------------------------ tabular output

FigureId parse_figure_id(std::string_view text) {
    if (text.starts_with("fig")) text.remove_prefix(3);
    if (text == "3") return FigureId::Cusum;
    if (text == "4") return FigureId::Recursive;
    if (text == "5") return FigureId::StatePath;
    if (text == "6") return FigureId::Decades;
    if (text == "7") return FigureId::Subsamples;
    if (text == "8") return FigureId::Shocks;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown figure '{}' (3..8)", text));
}

Tabular emit_figure_data(const Report& report, FigureId which) {
    Tabular t;
    switch (which) {
        case FigureId::Cusum: {
            const auto& c = report.cusum_result;
            if (c.statistic.empty()) throw Error(ErrorKind::SectionMissing, "CUSUM section is empty");
            t.file_name = "fig3_cusum.csv";
            t.columns = {"date", "cusum", "band_lo", "band_hi"};
            for (std::size_t i = 0; i < c.statistic.size(); ++i) {
                t.rows.push_back({c.start.plus_months(static_cast<long>(i)).iso(), c.statistic[i],
                                  c.band_lo[i], c.band_hi[i]});
            }
            break;
        }
        case FigureId::Recursive: {
            const auto& r = report.recursive_path;
            if (r.coefs.empty()) throw Error(ErrorKind::SectionMissing, "recursive section is empty");
            t.file_name = "fig4_recursive.csv";
            t.columns = {"date", "coef", "band_lo", "band_hi"};
            for (std::size_t i = 0; i < r.coefs.size(); ++i) {
                t.rows.push_back({r.start.plus_months(static_cast<long>(i)).iso(), r.coefs[i],
                                  r.bands_lo[i], r.bands_hi[i]});
            }
            break;
        }
        case FigureId::StatePath: {
            const auto& s = report.state_paths;
            if (s.filtered.empty()) throw Error(ErrorKind::SectionMissing, "state paths are empty");
            t.file_name = "fig5_state.csv";
            t.columns = {"date", "sv1_onestep", "sv1_filtered", "sv1_smoothed"};
            for (std::size_t i = 0; i < s.filtered.size(); ++i) {
                t.rows.push_back({s.start.plus_months(static_cast<long>(i)).iso(), s.onestep[i],
                                  s.filtered[i], s.smoothed[i]});
            }
            break;
        }
        case FigureId::Decades: {
            if (report.decade_averages.empty()) {
                throw Error(ErrorKind::SectionMissing, "decade averages are empty");
            }
            t.file_name = "fig6_decades.csv";
            t.columns = {"decade", "first", "last", "mean"};
            for (const auto& d : report.decade_averages) {
                t.rows.push_back({d.label, d.first.iso(), d.last.iso(), d.mean});
            }
            break;
        }
        case FigureId::Subsamples: {
            if (!report.subsample_table) {
                throw Error(ErrorKind::SectionMissing, "sub-sample table was skipped");
            }
            t.file_name = "fig7_subsample.csv";
            t.columns = {"date", "final_state", "final_rmse", "p_value"};
            for (const auto& r : *report.subsample_table) {
                t.rows.push_back({r.sample_end.iso(), r.final_state, r.final_rmse, r.p_value});
            }
            break;
        }
        case FigureId::Shocks: {
            if (!report.shock_series) throw Error(ErrorKind::SectionMissing, "shock series missing");
            const auto& s = *report.shock_series;
            t.file_name = "fig8_shocks.csv";
            t.columns = {"date", "shock", "burn_in"};
            for (std::size_t i = 0; i < s.shocks.size(); ++i) {
                t.rows.push_back({s.shocks.date_at(i).iso(), s.shocks[i], i < s.burn_in ? 1.0 : 0.0});
            }
            break;
        }
    }
    return t;
}

Tabular emit_table(const Report& report, TableId which) {
    Tabular t;
    switch (which) {
        case TableId::Adf:
            t.file_name = "table1_adf.csv";
            t.columns = {"variable", "transform", "deterministic", "statistic", "p_value", "lags",
                         "n_used", "crit_1", "crit_5", "crit_10", "reject_at"};
            for (const auto& row : report.adf_table) {
                const auto& r = row.result;
                t.rows.push_back({row.variable, row.transform, std::string(unitroot::to_string(r.deterministic)),
                                  r.statistic, r.p_value_approx, static_cast<double>(r.chosen_lags),
                                  static_cast<double>(r.n_used), r.crit_1, r.crit_5, r.crit_10,
                                  r.reject_at ? Cell(*r.reject_at) : Cell(std::string())});
            }
            break;
        case TableId::Ols: {
            const auto& o = report.ols_table;
            t.file_name = "table2_ols.csv";
            t.columns = {"statistic", "value"};
            const std::vector<std::pair<const char*, double>> stats = {
                {"coef", o.coef},         {"std_err", o.std_err}, {"t_stat", o.t_stat},
                {"p_value", o.p_value},   {"r2", o.r2},           {"adj_r2", o.adj_r2},
                {"se_regression", o.se_regression}, {"ssr", o.ssr}, {"log_lik", o.log_lik},
                {"aic", o.aic},           {"sic", o.sic},         {"hq", o.hq},
                {"dw", o.dw},             {"mean_dep", o.mean_dep}, {"sd_dep", o.sd_dep},
                {"n_obs", static_cast<double>(o.n_obs)}};
            for (const auto& [name, v] : stats) t.rows.push_back({std::string(name), v});
            break;
        }
        case TableId::StateSpace: {
            const auto& m = report.mle_result;
            t.file_name = "table3_sspace.csv";
            t.columns = {"row", "estimate", "std_err", "z", "p_value"};
            t.rows.push_back({std::string("log_var_meas"), m.params.log_var_meas, m.robust_se[0],
                              m.z_stats[0], m.p_values[0]});
            t.rows.push_back({std::string("log_var_state"), m.params.log_var_state, m.robust_se[1],
                              m.z_stats[1], m.p_values[1]});
            t.rows.push_back({std::string("final_state"), m.final_state, m.final_rmse, m.final_z, m.final_p});
            const double nan = std::nan("");
            t.rows.push_back({std::string("var_meas"), m.var_meas, nan, nan, nan});
            t.rows.push_back({std::string("var_state"), m.var_state, nan, nan, nan});
            t.rows.push_back({std::string("next_state"), m.next_state, m.next_rmse, nan, nan});
            t.rows.push_back({std::string("log_lik"), m.log_lik, nan, nan, nan});
            t.rows.push_back({std::string("aic"), m.aic, nan, nan, nan});
            t.rows.push_back({std::string("sic"), m.sic, nan, nan, nan});
            t.rows.push_back({std::string("hq"), m.hq, nan, nan, nan});
            break;
        }
        case TableId::SubsampleAppendix:
            if (!report.subsample_table) throw Error(ErrorKind::SectionMissing, "sub-sample table was skipped");
            t.file_name = "appendixA1_subsamples.csv";
            t.columns = {"sample_start", "sample_end", "final_state", "final_rmse", "z", "p_value",
                         "converged"};
            for (const auto& r : *report.subsample_table) {
                t.rows.push_back({r.sample_start.iso(), r.sample_end.iso(), r.final_state, r.final_rmse, r.z,
                                  r.p_value, r.converged ? 1.0 : 0.0});
            }
            break;
    }
    return t;
}

}  // namespace tvp::pipeline
