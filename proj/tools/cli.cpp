#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tvp/pipeline.hpp"
#include "tvp/report_io.hpp"
#include "tvp/simlab.hpp"

namespace tvp::cli {

namespace {

enum class Format { Json, Csv, Text };

struct Common {
    std::string input;
    std::string out;
    std::string config;
    std::string y_col;
    std::string x_col;
    std::string growth_mode;
    std::string growth_units;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::optional<double> cusum_sig;
    std::optional<int> max_lags;
    std::string subsample_ends;
    std::optional<unsigned> threads;
};

void add_data_options(CLI::App* sub, Common& c, bool input_required = true) {
    auto* in = sub->add_option("--input,-i", c.input, "Monthly CSV with a date column and two level series");
    if (input_required) in->required();
    sub->add_option("--y-col", c.y_col, "Column of the dependent series (default: first non-date column)");
    sub->add_option("--x-col", c.x_col, "Column of the regressor series (default: second non-date column)");
    sub->add_option("--config", c.config, "JSON config file; command-line flags override it");
    sub->add_option("--growth-mode", c.growth_mode, "Year-on-year growth formula")
        ->check(CLI::IsMember({"logdiff", "pct"}));
    sub->add_option("--growth-units", c.growth_units, "Growth in percent or as fractions")
        ->check(CLI::IsMember({"percent", "fraction"}));
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--out,-o", c.out, "Output file (output directory for 'pipeline')");
}

Format format_of(const std::string& f) {
    if (f == "csv") return Format::Csv;
    if (f == "text") return Format::Text;
    return Format::Json;
}

pipeline::PipelineConfig build_config(const Common& c) {
    pipeline::PipelineConfig cfg;
    if (!c.config.empty()) cfg = read_config_file(c.config, cfg);
    if (!c.growth_mode.empty()) cfg.growth_mode = parse_growth_mode(c.growth_mode);
    if (!c.growth_units.empty()) cfg.growth_units = pipeline::parse_growth_units(c.growth_units);
    if (c.seed) cfg.seed = *c.seed;
    if (c.cusum_sig) cfg.cusum_significance = *c.cusum_sig;
    if (c.max_lags) {
        cfg.adf_levels.max_lags = *c.max_lags;
        cfg.adf_differences.max_lags = *c.max_lags;
    }
    if (!c.subsample_ends.empty()) {
        cfg.subsample_end_dates.clear();
        std::stringstream ss(c.subsample_ends);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) cfg.subsample_end_dates.push_back(MonthDate::parse(item));
        }
    }
    if (c.threads) cfg.threads = *c.threads;
    return cfg;
}

Dataset load(const Common& c) { return read_csv_file(c.input, CsvSchema{"date", c.y_col, c.x_col}); }

/// Demeaned growth pair as fed to the regression and state-space stages.
std::pair<MonthlySeries, MonthlySeries> regression_inputs(const Dataset& data, const pipeline::PipelineConfig& cfg) {
    const auto [y, x] = pipeline::growth_series(data, cfg);
    return {demean(y).first, demean(x).first};
}

void emit(const Common& c, std::ostream& out, const std::string& body) {
    if (c.out.empty()) {
        out << body;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", c.out));
    f << body;
}

std::string csv_of(const pipeline::Tabular& t) {
    std::ostringstream os;
    write_tabular_csv(os, t);
    return os.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int map_error(const Error& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    return is_data_error(e.kind()) ? kExitData : kExitEstimation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-varying money growth / inflation elasticity toolkit", "tvp"};
    app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");
    app.require_subcommand(1);

    Common c;

    auto* validate = app.add_subcommand("validate", "Check a CSV and print its span");
    add_data_options(validate, c);

    auto* adf = app.add_subcommand("adf", "Augmented Dickey-Fuller tests on levels and first differences");
    add_data_options(adf, c);
    adf->add_option("--max-lags", c.max_lags, "Maximum augmentation lag (default floor(12 (T/100)^0.25))")
        ->check(CLI::NonNegativeNumber);

    auto* ols = app.add_subcommand("ols", "No-intercept OLS of demeaned y growth on demeaned x growth");
    add_data_options(ols, c);

    auto* cusum = app.add_subcommand("cusum", "CUSUM of recursive residuals with significance bands");
    add_data_options(cusum, c);
    cusum->add_option("--cusum-sig", c.cusum_sig, "Band significance level")
        ->check(CLI::IsMember({0.01, 0.05, 0.10}));

    auto* recursive = app.add_subcommand("recursive", "Recursive OLS coefficient path with +-2 se bands");
    add_data_options(recursive, c);

    auto* sspace_cmd = app.add_subcommand("sspace", "Time-varying coefficient model by Kalman-filter MLE");
    add_data_options(sspace_cmd, c);

    auto* pipe = app.add_subcommand("pipeline", "Run every stage and write tables and figure data");
    add_data_options(pipe, c);
    pipe->add_option("--cusum-sig", c.cusum_sig, "CUSUM band significance level")
        ->check(CLI::IsMember({0.01, 0.05, 0.10}));
    pipe->add_option("--max-lags", c.max_lags, "Maximum ADF augmentation lag")->check(CLI::NonNegativeNumber);
    pipe->add_option("--subsample-ends", c.subsample_ends, "Comma-separated YYYY-MM end dates");
    pipe->add_option("--seed", c.seed, "Seed recorded in the report");
    pipe->add_option("--threads", c.threads, "Worker threads for sub-sample fits (0: all cores)");
    bool no_timestamp = false;
    pipe->add_flag("--no-timestamp", no_timestamp, "Omit the generation time from report.json");

    auto* sub = app.add_subcommand("subsample", "Expanding-window final states");
    add_data_options(sub, c);
    sub->add_option("--subsample-ends", c.subsample_ends, "Comma-separated YYYY-MM end dates");
    sub->add_option("--threads", c.threads, "Worker threads (0: all cores)");

    std::string estimator;
    std::size_t reps = 200;
    std::size_t n_obs = 0;
    std::string process = "rw";
    double phi = 0.5;
    double beta_after = 1.0;
    std::string reps_csv;
    std::uint64_t sim_seed = 1;
    unsigned sim_threads = 0;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo study of an estimator on synthetic data");
    sim->add_option("estimator", estimator, "mle, adf or cusum")
        ->required()
        ->check(CLI::IsMember({"mle", "adf", "cusum"}));
    sim->add_option("--reps", reps, "Replications (>= 10)")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Study seed; replication r uses seed XOR r")->capture_default_str();
    sim->add_option("--n-obs", n_obs, "Sample length (default 543 for mle, 500 otherwise)");
    sim->add_option("--process", process, "adf: random walk or AR(1)")->check(CLI::IsMember({"rw", "ar1"}));
    sim->add_option("--phi", phi, "adf: AR(1) coefficient")->capture_default_str();
    sim->add_option("--beta-after", beta_after, "cusum: slope after the mid-sample break")->capture_default_str();
    sim->add_option("--cusum-sig", c.cusum_sig, "cusum: band significance level")
        ->check(CLI::IsMember({0.01, 0.05, 0.10}));
    sim->add_option("--max-lags", c.max_lags, "adf: maximum augmentation lag")->check(CLI::NonNegativeNumber);
    sim->add_option("--threads", sim_threads, "Worker threads (0: all cores)");
    sim->add_option("--reps-csv", reps_csv, "Also write one CSV row per replication to this file");
    sim->add_option("--out,-o", c.out, "Write the summary JSON here instead of standard output");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\nRun 'tvp --help' for usage.\n";
        return kExitUsage;
    }
    if (pipe->parsed() && c.out.empty()) {
        err << "usage error: pipeline needs --out <directory>\nRun 'tvp --help' for usage.\n";
        return kExitUsage;
    }

    try {
        const Format fmt_kind = format_of(c.format);

        if (sim->parsed()) {
            simlab::Study study;
            if (estimator == "mle") {
                simlab::MleStudy s;
                if (n_obs) s.dgp.n_obs = n_obs;
                study = s;
            } else if (estimator == "adf") {
                simlab::AdfStudy s;
                if (n_obs) s.n_obs = n_obs;
                s.process = process == "ar1" ? simlab::AdfStudy::Process::Ar1 : simlab::AdfStudy::Process::RandomWalk;
                s.phi = phi;
                if (c.max_lags) s.spec.max_lags = *c.max_lags;
                study = s;
            } else {
                simlab::CusumStudy s;
                if (n_obs) s.dgp.n_obs = n_obs;
                s.dgp.beta_after = beta_after;
                if (c.cusum_sig) s.significance = *c.cusum_sig;
                study = s;
            }
            const auto summary = simlab::monte_carlo(study, reps, sim_seed, !reps_csv.empty(), sim_threads);
            if (!reps_csv.empty()) {
                std::ofstream f(reps_csv, std::ios::binary);
                if (!f) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", reps_csv));
                write_mc_reps_csv(f, summary);
            }
            emit(c, out, dump(to_json(summary)));
            return kExitOk;
        }

        const Dataset data = load(c);
        const auto cfg = build_config(c);

        if (validate->parsed()) {
            const Json j = {{"ok", true},
                            {"y", data.y_raw().name()},
                            {"x", data.x_raw().name()},
                            {"start", data.y_raw().start().iso()},
                            {"end", data.y_raw().end().iso()},
                            {"n_obs", data.size()}};
            emit(c, out,
                 fmt_kind == Format::Json
                     ? dump(j)
                     : fmt::format("ok: {} and {}, {} to {}, {} months\n", data.y_raw().name(), data.x_raw().name(),
                                   data.y_raw().start().iso(), data.y_raw().end().iso(), data.size()));
            return kExitOk;
        }

        pipeline::Report partial;
        partial.config = cfg;
        partial.y_name = data.y_raw().name();
        partial.x_name = data.x_raw().name();

        if (adf->parsed()) {
            pipeline::PipelineConfig adf_cfg = cfg;
            const auto [yg, xg] = pipeline::growth_series(data, adf_cfg);
            for (const auto& [raw, growth] : {std::pair{&data.y_raw(), &yg}, std::pair{&data.x_raw(), &xg}}) {
                const MonthlySeries levels =
                    cfg.adf_target == pipeline::AdfTarget::LogLevels ? log_levels(*raw) : *growth;
                partial.adf_table.push_back({raw->name(), "levels", unitroot::adf(levels, cfg.adf_levels)});
                partial.adf_table.push_back(
                    {raw->name(), "first difference", unitroot::adf(first_difference(levels), cfg.adf_differences)});
            }
            if (fmt_kind == Format::Json) {
                Json arr = Json::array();
                for (const auto& r : partial.adf_table) {
                    Json row = to_json(r.result);
                    row["variable"] = r.variable;
                    row["transform"] = r.transform;
                    arr.push_back(row);
                }
                emit(c, out, dump(arr));
            } else {
                emit(c, out,
                     fmt_kind == Format::Csv ? csv_of(emit_table(partial, pipeline::TableId::Adf))
                                             : adf_text(partial.adf_table));
            }
            return kExitOk;
        }

        if (sub->parsed()) {
            const auto [yg, xg] = pipeline::growth_series(data, cfg);
            const auto ends = cfg.subsample_end_dates.empty() ? pipeline::default_subsample_ends(yg.start(), yg.end())
                                                              : cfg.subsample_end_dates;
            partial.subsample_table = pipeline::subsample_final_states(data, ends, cfg);
            if (fmt_kind == Format::Json) {
                Json arr = Json::array();
                for (const auto& r : *partial.subsample_table) arr.push_back(to_json(r));
                emit(c, out, dump(arr));
            } else {
                emit(c, out,
                     fmt_kind == Format::Csv ? csv_of(emit_table(partial, pipeline::TableId::SubsampleAppendix))
                                             : subsample_text(*partial.subsample_table));
            }
            return kExitOk;
        }

        if (pipe->parsed()) {
            const auto report = pipeline::run_pipeline(data, cfg);
            write_outputs(report, c.out, !no_timestamp);
            if (fmt_kind == Format::Text) out << report_text(report);
            else if (fmt_kind == Format::Json) out << dump(report_to_json(report, !no_timestamp));
            return kExitOk;
        }

        const auto [y, x] = regression_inputs(data, cfg);
        partial.sample_start = y.start();
        partial.sample_end = y.end();

        if (ols->parsed()) {
            partial.ols_table = regress::ols_no_intercept(y, x);
            emit(c, out,
                 fmt_kind == Format::Json  ? dump(to_json(partial.ols_table))
                 : fmt_kind == Format::Csv ? csv_of(emit_table(partial, pipeline::TableId::Ols))
                                           : ols_text(partial.ols_table, partial.y_name, partial.x_name, y.start(),
                                                      y.end()));
        } else if (cusum->parsed()) {
            partial.cusum_result = regress::cusum(y, x, cfg.cusum_significance);
            const auto& r = partial.cusum_result;
            emit(c, out,
                 fmt_kind == Format::Json  ? dump(to_json(r))
                 : fmt_kind == Format::Csv ? csv_of(emit_figure_data(partial, pipeline::FigureId::Cusum))
                                           : fmt::format("CUSUM at {:.0f}%: {}\n", r.significance * 100,
                                                         r.stable ? std::string("stable")
                                                                  : "crosses the band at " + r.first_crossing->iso()));
        } else if (recursive->parsed()) {
            partial.recursive_path = regress::recursive_coefficients(y, x);
            const auto& r = partial.recursive_path;
            emit(c, out,
                 fmt_kind == Format::Json ? dump(to_json(r))
                                          : csv_of(emit_figure_data(partial, pipeline::FigureId::Recursive)));
        } else if (sspace_cmd->parsed()) {
            const auto model = sspace::TvpModel::from_series(y, x);
            partial.mle_result = sspace::fit_mle(model, sspace::default_start(model, cfg.mle.init), cfg.mle);
            emit(c, out,
                 fmt_kind == Format::Json  ? dump(to_json(partial.mle_result))
                 : fmt_kind == Format::Csv ? csv_of(emit_table(partial, pipeline::TableId::StateSpace))
                                           : mle_text(partial.mle_result, y.start(), y.end()));
        }
        return kExitOk;
    } catch (const Error& e) {
        return map_error(e, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitEstimation;
    }
}

}  // namespace tvp::cli
