#include "tvp/report_io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace tvp {

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json nums(const std::vector<double>& v) {
    Json arr = Json::array();
    for (double e : v) arr.push_back(num(e));
    return arr;
}

Json dates(MonthDate start, std::size_t n) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < n; ++i) arr.push_back(start.plus_months(static_cast<long>(i)).iso());
    return arr;
}

std::string_view init_name(sspace::StateInit::Kind k) {
    switch (k) {
        case sspace::StateInit::Kind::BigK: return "big-k";
        case sspace::StateInit::Kind::DiffuseLimit: return "diffuse-limit";
        case sspace::StateInit::Kind::Explicit: return "explicit";
    }
    return "?";
}

sspace::StateInit::Kind parse_init(const std::string& s) {
    if (s == "big-k") return sspace::StateInit::Kind::BigK;
    if (s == "diffuse-limit") return sspace::StateInit::Kind::DiffuseLimit;
    if (s == "explicit") return sspace::StateInit::Kind::Explicit;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown state init '{}'", s));
}

Json adf_spec_json(const unitroot::AdfSpec& s) {
    return {{"deterministic", std::string(unitroot::to_string(s.deterministic))},
            {"max_lags", s.max_lags},
            {"selection", s.selection == unitroot::LagSelection::Schwarz ? "schwarz" : "fixed"}};
}

unitroot::AdfSpec adf_spec_from(const Json& j, unitroot::AdfSpec s) {
    for (const auto& [key, v] : j.items()) {
        if (key == "deterministic") {
            s.deterministic = unitroot::parse_deterministic(v.get<std::string>());
        } else if (key == "max_lags") {
            s.max_lags = v.get<int>();
        } else if (key == "selection") {
            const auto sel = v.get<std::string>();
            if (sel == "schwarz") s.selection = unitroot::LagSelection::Schwarz;
            else if (sel == "fixed") s.selection = unitroot::LagSelection::Fixed;
            else throw Error(ErrorKind::InvalidArgument, fmt::format("unknown lag selection '{}'", sel));
        } else {
            throw Error(ErrorKind::InvalidArgument, fmt::format("unknown ADF config key '{}'", key));
        }
    }
    return s;
}

std::string stars(const std::optional<double>& level) {
    if (!level) return "";
    if (*level <= 0.01) return "*";
    if (*level <= 0.05) return "**";
    return "***";
}

std::string cell_text(const pipeline::Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) {
        if (s->find_first_of(",\"\n") == std::string::npos) return *s;
        std::string q = "\"";
        for (char ch : *s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    }
    const double v = std::get<double>(c);
    return std::isfinite(v) ? format_double(v) : std::string();
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------------- JSON

Json to_json(const unitroot::AdfResult& r) {
    return {{"statistic", num(r.statistic)},
            {"chosen_lags", r.chosen_lags},
            {"max_lags", r.max_lags},
            {"crit_1", num(r.crit_1)},
            {"crit_5", num(r.crit_5)},
            {"crit_10", num(r.crit_10)},
            {"p_value_approx", num(r.p_value_approx)},
            {"reject_at", r.reject_at ? num(*r.reject_at) : Json(nullptr)},
            {"n_used", r.n_used},
            {"deterministic", std::string(unitroot::to_string(r.deterministic))}};
}

Json to_json(const regress::OlsResult& r) {
    return {{"coef", num(r.coef)},       {"std_err", num(r.std_err)},
            {"t_stat", num(r.t_stat)},   {"p_value", num(r.p_value)},
            {"r2", num(r.r2)},           {"adj_r2", num(r.adj_r2)},
            {"se_regression", num(r.se_regression)}, {"ssr", num(r.ssr)},
            {"log_lik", num(r.log_lik)}, {"aic", num(r.aic)},
            {"sic", num(r.sic)},         {"hq", num(r.hq)},
            {"dw", num(r.dw)},           {"mean_dep", num(r.mean_dep)},
            {"sd_dep", num(r.sd_dep)},   {"n_obs", r.n_obs}};
}

Json to_json(const regress::CusumResult& r) {
    return {{"start", r.start.iso()},
            {"significance", r.significance},
            {"sigma", num(r.sigma)},
            {"stable", r.stable},
            {"first_crossing", r.first_crossing ? Json(r.first_crossing->iso()) : Json(nullptr)},
            {"dates", dates(r.start, r.statistic.size())},
            {"statistic", nums(r.statistic)},
            {"band_lo", nums(r.band_lo)},
            {"band_hi", nums(r.band_hi)}};
}

Json to_json(const regress::RecursivePath& r) {
    return {{"start", r.start.iso()},
            {"start_index", r.start_index},
            {"dates", dates(r.start, r.coefs.size())},
            {"coefs", nums(r.coefs)},
            {"std_errs", nums(r.std_errs)},
            {"bands_lo", nums(r.bands_lo)},
            {"bands_hi", nums(r.bands_hi)}};
}

Json to_json(const sspace::MleResult& r) {
    Json j = {{"log_var_meas", num(r.params.log_var_meas)},
              {"log_var_state", num(r.params.log_var_state)},
              {"robust_se", {num(r.robust_se[0]), num(r.robust_se[1])}},
              {"z_stats", {num(r.z_stats[0]), num(r.z_stats[1])}},
              {"p_values", {num(r.p_values[0]), num(r.p_values[1])}},
              {"var_meas", num(r.var_meas)},
              {"var_state", num(r.var_state)},
              {"gamma", num(r.gamma)},
              {"gamma_se", r.gamma_se ? num(*r.gamma_se) : Json(nullptr)},
              {"final_state", num(r.final_state)},
              {"final_rmse", num(r.final_rmse)},
              {"final_z", num(r.final_z)},
              {"final_p", num(r.final_p)},
              {"next_state", num(r.next_state)},
              {"next_rmse", num(r.next_rmse)},
              {"log_lik", num(r.log_lik)},
              {"aic", num(r.aic)},
              {"sic", num(r.sic)},
              {"hq", num(r.hq)},
              {"n_obs", r.n_obs},
              {"n_params", r.n_params},
              {"n_diffuse", r.n_diffuse},
              {"n_iter", r.n_iter},
              {"converged", r.converged},
              {"at_bound", r.at_bound},
              {"message", r.message},
              {"fd_gradient_inf", num(r.fd_gradient_inf)}};
    return j;
}

Json to_json(const pipeline::SubSampleRow& r) {
    return {{"sample_start", r.sample_start.iso()},
            {"sample_end", r.sample_end.iso()},
            {"final_state", num(r.final_state)},
            {"final_rmse", num(r.final_rmse)},
            {"z", num(r.z)},
            {"p_value", num(r.p_value)},
            {"log_var_meas", num(r.log_var_meas)},
            {"log_var_state", num(r.log_var_state)},
            {"log_lik", num(r.log_lik)},
            {"converged", r.converged},
            {"at_bound", r.at_bound},
            {"message", r.message}};
}

Json to_json(const simlab::McSummary& s) {
    Json params = Json::array();
    for (const auto& p : s.params) {
        params.push_back({{"name", p.name},
                          {"truth", num(p.truth)},
                          {"mean", num(p.mean)},
                          {"median", num(p.median)},
                          {"bias", num(p.bias)},
                          {"rmse", num(p.rmse)},
                          {"coverage95", num(p.coverage95)}});
    }
    return {{"estimator", s.estimator},
            {"n_reps", s.n_reps},
            {"n_failed", s.n_failed},
            {"seed", s.seed},
            {"params", params},
            {"rejection_rate", s.rejection_rate ? num(*s.rejection_rate) : Json(nullptr)},
            {"max_fd_gradient", s.max_fd_gradient ? num(*s.max_fd_gradient) : Json(nullptr)}};
}

Json config_to_json(const pipeline::PipelineConfig& cfg) {
    Json ends = Json::array();
    for (const auto& d : cfg.subsample_end_dates) ends.push_back(d.iso());
    const auto& m = cfg.mle;
    return {{"growth_mode", std::string(to_string(cfg.growth_mode))},
            {"growth_units", std::string(pipeline::to_string(cfg.growth_units))},
            {"adf_target", std::string(pipeline::to_string(cfg.adf_target))},
            {"adf_levels", adf_spec_json(cfg.adf_levels)},
            {"adf_differences", adf_spec_json(cfg.adf_differences)},
            {"cusum_significance", cfg.cusum_significance},
            {"subsample_end_dates", ends},
            {"subsample_full_sample_mean", cfg.subsample_full_sample_mean},
            {"mle",
             {{"init", std::string(init_name(m.init.kind))},
              {"init_mean", m.init.mean},
              {"init_var", m.init.var},
              {"kappa", m.init.kappa},
              {"max_iter", m.max_iter},
              {"grad_tol", m.grad_tol},
              {"rel_tol", m.rel_tol},
              {"parameterization",
               m.parameterization == sspace::Parameterization::LogVariance ? "log-variance" : "variance"},
              {"estimate_gamma", m.estimate_gamma},
              {"log_var_lower", m.log_var_lower},
              {"log_var_upper", m.log_var_upper}}},
            {"decade_source", std::string(pipeline::to_string(cfg.decade_source))},
            {"seed", cfg.seed}};
}

pipeline::PipelineConfig config_from_json(const Json& j, pipeline::PipelineConfig cfg) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "growth_mode") {
                cfg.growth_mode = parse_growth_mode(v.get<std::string>());
            } else if (key == "growth_units") {
                cfg.growth_units = pipeline::parse_growth_units(v.get<std::string>());
            } else if (key == "adf_target") {
                cfg.adf_target = pipeline::parse_adf_target(v.get<std::string>());
            } else if (key == "adf_levels") {
                cfg.adf_levels = adf_spec_from(v, cfg.adf_levels);
            } else if (key == "adf_differences") {
                cfg.adf_differences = adf_spec_from(v, cfg.adf_differences);
            } else if (key == "cusum_significance") {
                cfg.cusum_significance = v.get<double>();
            } else if (key == "subsample_end_dates") {
                cfg.subsample_end_dates.clear();
                for (const auto& d : v) cfg.subsample_end_dates.push_back(MonthDate::parse(d.get<std::string>()));
            } else if (key == "subsample_full_sample_mean") {
                cfg.subsample_full_sample_mean = v.get<bool>();
            } else if (key == "decade_source") {
                cfg.decade_source = pipeline::parse_state_path(v.get<std::string>());
            } else if (key == "seed") {
                cfg.seed = v.get<std::uint64_t>();
            } else if (key == "threads") {
                cfg.threads = v.get<unsigned>();
            } else if (key == "mle") {
                auto& m = cfg.mle;
                for (const auto& [mk, mv] : v.items()) {
                    if (mk == "init") m.init.kind = parse_init(mv.get<std::string>());
                    else if (mk == "init_mean") m.init.mean = mv.get<double>();
                    else if (mk == "init_var") m.init.var = mv.get<double>();
                    else if (mk == "kappa") m.init.kappa = mv.get<double>();
                    else if (mk == "max_iter") m.max_iter = mv.get<int>();
                    else if (mk == "grad_tol") m.grad_tol = mv.get<double>();
                    else if (mk == "rel_tol") m.rel_tol = mv.get<double>();
                    else if (mk == "estimate_gamma") m.estimate_gamma = mv.get<bool>();
                    else if (mk == "log_var_lower") m.log_var_lower = mv.get<double>();
                    else if (mk == "log_var_upper") m.log_var_upper = mv.get<double>();
                    else if (mk == "parameterization") {
                        const auto p = mv.get<std::string>();
                        if (p == "log-variance") m.parameterization = sspace::Parameterization::LogVariance;
                        else if (p == "variance") m.parameterization = sspace::Parameterization::Variance;
                        else throw Error(ErrorKind::InvalidArgument, fmt::format("unknown parameterization '{}'", p));
                    } else {
                        throw Error(ErrorKind::InvalidArgument, fmt::format("unknown mle config key '{}'", mk));
                    }
                }
            } else {
                throw Error(ErrorKind::InvalidArgument, fmt::format("unknown config key '{}'", key));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("bad config value: {}", e.what()));
    }
    return cfg;
}

pipeline::PipelineConfig read_config_file(const std::string& path, pipeline::PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MalformedInput, fmt::format("cannot open config file '{}'", path));
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedInput, fmt::format("config file '{}': {}", path, e.what()));
    }
    return config_from_json(j, std::move(base));
}

Json report_to_json(const pipeline::Report& rep, bool with_timestamp) {
    Json prov = {{"data_hash", rep.provenance.data_hash},
                 {"config_hash", rep.provenance.config_hash},
                 {"version", rep.provenance.version}};
    if (with_timestamp) prov["generated_at"] = rep.provenance.generated_at;

    Json adf = Json::array();
    for (const auto& row : rep.adf_table) {
        Json r = to_json(row.result);
        r["variable"] = row.variable;
        r["transform"] = row.transform;
        adf.push_back(std::move(r));
    }
    const auto& sp = rep.state_paths;
    Json decades = Json::array();
    for (const auto& d : rep.decade_averages) {
        decades.push_back({{"decade", d.label}, {"first", d.first.iso()}, {"last", d.last.iso()}, {"mean", num(d.mean)}});
    }

    Json j = {{"provenance", prov},
              {"config", config_to_json(rep.config)},
              {"y_name", rep.y_name},
              {"x_name", rep.x_name},
              {"sample_start", rep.sample_start.iso()},
              {"sample_end", rep.sample_end.iso()},
              {"n_obs", rep.n_obs},
              {"y_mean", num(rep.y_mean)},
              {"x_mean", num(rep.x_mean)},
              {"adf_table", adf},
              {"ols_table", to_json(rep.ols_table)},
              {"cusum_result", to_json(rep.cusum_result)},
              {"recursive_path", to_json(rep.recursive_path)},
              {"mle_result", to_json(rep.mle_result)},
              {"state_paths",
               {{"start", sp.start.iso()},
                {"onestep", nums(sp.onestep)},
                {"onestep_rmse", nums(sp.onestep_rmse)},
                {"filtered", nums(sp.filtered)},
                {"filtered_rmse", nums(sp.filtered_rmse)},
                {"smoothed", nums(sp.smoothed)},
                {"smoothed_rmse", nums(sp.smoothed_rmse)}}},
              {"decade_averages", decades}};
    if (rep.shock_series) {
        j["shock_series"] = {{"start", rep.shock_series->shocks.start().iso()},
                             {"burn_in", rep.shock_series->burn_in},
                             {"shocks", nums({rep.shock_series->shocks.values().begin(),
                                              rep.shock_series->shocks.values().end()})}};
    } else {
        j["shock_series"] = nullptr;
    }
    if (rep.subsample_table) {
        Json rows = Json::array();
        for (const auto& r : *rep.subsample_table) rows.push_back(to_json(r));
        j["subsample_table"] = rows;
    } else {
        j["subsample_table"] = nullptr;
    }
    j["skipped"] = rep.skipped;
    return j;
}

// ---------------------------------------------------------------------- text

std::string adf_text(const std::vector<pipeline::AdfRow>& rows) {
    std::string out = fmt::format("{:<24}{:>12}{:>10}{:>18}{:>10}\n", "Variables", "Levels", "p-values",
                                  "First Difference", "p-values");
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
        const auto& lv = rows[i].result;
        const auto& df = rows[i + 1].result;
        out += fmt::format("{:<24}{:>12.5f}{:>10}{:>18.5f}{:>10}\n", rows[i].variable, lv.statistic,
                           fmt::format("{:.4f}{}", lv.p_value_approx, stars(lv.reject_at)), df.statistic,
                           fmt::format("{:.4f}{}", df.p_value_approx, stars(df.reject_at)));
    }
    if (!rows.empty()) {
        const auto& r = rows.front().result;
        out += fmt::format(
            "Note: * significant at 1%, ** at 5%, *** at 10%. Levels critical values ({}): 1% = {:.6f}; 5% = {:.6f}; "
            "10% = {:.6f}\n",
            unitroot::to_string(r.deterministic), r.crit_1, r.crit_5, r.crit_10);
    }
    return out;
}

std::string ols_text(const regress::OlsResult& r, const std::string& dep, const std::string& reg, MonthDate first,
                     MonthDate last) {
    std::string out;
    out += fmt::format("Dependent Variable: {}\nMethod: Least Squares\nSample: {} {}\nIncluded observations: {}\n",
                       dep, first.label(), last.label(), r.n_obs);
    out += fmt::format("{:<12}{:>14}{:>14}{:>14}{:>10}\n", "Variable", "Coefficient", "Std. Error", "t-Statistic",
                       "Prob.");
    out += fmt::format("{:<12}{:>14.6f}{:>14.6f}{:>14.5f}{:>10.4f}\n", reg, r.coef, r.std_err, r.t_stat, r.p_value);
    auto line = [&](const char* a, double av, const char* b, double bv) {
        out += fmt::format("{:<22}{:>12.6f}    {:<24}{:>12.6f}\n", a, av, b, bv);
    };
    line("R-squared", r.r2, "Mean dependent var", r.mean_dep);
    line("Adjusted R-squared", r.adj_r2, "S.D. dependent var", r.sd_dep);
    line("S.E. of regression", r.se_regression, "Akaike info criterion", r.aic);
    line("Sum squared resid", r.ssr, "Schwarz criterion", r.sic);
    line("Log likelihood", r.log_lik, "Hannan-Quinn criter.", r.hq);
    out += fmt::format("{:<22}{:>12.6f}\n", "Durbin-Watson stat", r.dw);
    return out;
}

std::string mle_text(const sspace::MleResult& r, MonthDate first, MonthDate last) {
    std::string out;
    out += fmt::format("Method: Maximum likelihood (BFGS)\nSample: {} {}\nIncluded observations: {}\n", first.label(),
                       last.label(), r.n_obs);
    out += r.converged ? fmt::format("Convergence achieved after {} iterations\n", r.n_iter)
                       : fmt::format("Convergence not achieved: {}\n", r.message);
    out += "Coefficient covariance computed using the Huber-White method with observed Hessian\n";
    out += fmt::format("{:<16}{:>14}{:>14}{:>14}{:>10}\n", "", "Coefficient", "Std. Error", "z-Statistic", "Prob.");
    out += fmt::format("{:<16}{:>14.6f}{:>14.6f}{:>14.5f}{:>10.4f}\n", "log var meas", r.params.log_var_meas,
                       r.robust_se[0], r.z_stats[0], r.p_values[0]);
    out += fmt::format("{:<16}{:>14.6f}{:>14.6f}{:>14.5f}{:>10.4f}\n", "log var state", r.params.log_var_state,
                       r.robust_se[1], r.z_stats[1], r.p_values[1]);
    out += fmt::format("{:<16}{:>14}{:>14}{:>14}{:>10}\n", "", "Final State", "Root MSE", "z-Statistic", "Prob.");
    out += fmt::format("{:<16}{:>14.6f}{:>14.6f}{:>14.6f}{:>10.4f}\n", "state", r.final_state, r.final_rmse,
                       r.final_z, r.final_p);
    out += fmt::format("{:<22}{:>12.4f}    {:<24}{:>12.6f}\n", "Log likelihood", r.log_lik, "Akaike info criterion",
                       r.aic);
    out += fmt::format("{:<22}{:>12}    {:<24}{:>12.6f}\n", "Parameters", r.n_params, "Schwarz criterion", r.sic);
    out += fmt::format("{:<22}{:>12}    {:<24}{:>12.6f}\n", "Diffuse priors", r.n_diffuse, "Hannan-Quinn criter.",
                       r.hq);
    out += fmt::format("One step ahead: {:.6f} (RMSE {:.6f})\n", r.next_state, r.next_rmse);
    return out;
}

std::string subsample_text(const std::vector<pipeline::SubSampleRow>& rows) {
    std::string out = fmt::format("{:<20}{:>14}{:>12}{:>14}{:>10}\n", "Sample", "Final State", "Root MSE",
                                  "z-Statistic", "Prob.");
    for (const auto& r : rows) {
        out += fmt::format("{:<20}{:>14.6f}{:>12.6f}{:>14.6f}{:>10.4f}{}\n",
                           fmt::format("{}-{}", r.sample_start.label(), r.sample_end.label()), r.final_state,
                           r.final_rmse, r.z, r.p_value, r.converged ? "" : "  (not converged)");
    }
    return out;
}

std::string report_text(const pipeline::Report& rep) {
    std::string out = "Unit root tests\n" + adf_text(rep.adf_table) + "\nConstant coefficient\n" +
                      ols_text(rep.ols_table, rep.y_name, rep.x_name, rep.sample_start, rep.sample_end) +
                      fmt::format("CUSUM at {:.0f}%: {}\n", rep.config.cusum_significance * 100,
                                  rep.cusum_result.stable
                                      ? std::string("stable")
                                      : "crosses the band at " + rep.cusum_result.first_crossing->iso()) +
                      "\nTime-varying coefficient\n" + mle_text(rep.mle_result, rep.sample_start, rep.sample_end);
    if (rep.subsample_table) out += "\nSub-sample final states\n" + subsample_text(*rep.subsample_table);
    for (const auto& [section, why] : rep.skipped) out += fmt::format("skipped {}: {}\n", section, why);
    return out;
}

// ----------------------------------------------------------------------- CSV

void write_tabular_csv(std::ostream& out, const pipeline::Tabular& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
        out << '\n';
    }
}

std::vector<std::string> write_outputs(const pipeline::Report& report, const std::filesystem::path& dir,
                                       bool with_timestamp) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    std::vector<std::string> written;
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", (dir / name).string()));
        written.push_back(name);
        return f;
    };
    {
        auto f = open("report.json");
        f << report_to_json(report, with_timestamp).dump(2) << '\n';
    }
    std::vector<pipeline::Tabular> tables = {emit_table(report, pipeline::TableId::Adf),
                                             emit_table(report, pipeline::TableId::Ols),
                                             emit_table(report, pipeline::TableId::StateSpace)};
    if (report.subsample_table) tables.push_back(emit_table(report, pipeline::TableId::SubsampleAppendix));
    for (int fig = 3; fig <= 8; ++fig) {
        const auto id = static_cast<pipeline::FigureId>(fig);
        if (id == pipeline::FigureId::Subsamples && !report.subsample_table) continue;
        if (id == pipeline::FigureId::Shocks && !report.shock_series) continue;
        tables.push_back(emit_figure_data(report, id));
    }
    for (const auto& t : tables) {
        auto f = open(t.file_name);
        write_tabular_csv(f, t);
    }
    return written;
}

void write_mc_reps_csv(std::ostream& out, const simlab::McSummary& s) {
    std::size_t width = 0;
    for (const auto& r : s.reps) width = std::max(width, r.estimates.size());
    out << "rep,seed,ok,rejected";
    for (std::size_t i = 0; i < width; ++i) out << ",est" << i;
    for (std::size_t i = 0; i < width; ++i) out << ",se" << i;
    out << ",fd_gradient_inf,message\n";
    for (const auto& r : s.reps) {
        out << r.rep << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << (r.rejected ? 1 : 0);
        for (std::size_t i = 0; i < width; ++i) out << ',' << (i < r.estimates.size() ? format_double(r.estimates[i]) : "");
        for (std::size_t i = 0; i < width; ++i) out << ',' << (i < r.std_errs.size() ? format_double(r.std_errs[i]) : "");
        out << ',' << format_double(r.fd_gradient_inf) << ',' << cell_text(pipeline::Cell(r.message)) << '\n';
    }
}

}  // namespace tvp
