#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <doctest.h>

#include "oracles.hpp"
#include "tvp/error.hpp"
#include "tvp/pipeline.hpp"
#include "tvp/report_io.hpp"
#include "tvp/simlab.hpp"

using namespace tvp;
using namespace tvp::pipeline;

namespace {

/// Levels whose 12-month log growth (x100) reproduces the given growth pair.
Dataset levels_from_growth(const MonthlySeries& gy, const MonthlySeries& gx) {
    auto integrate = [](const MonthlySeries& g, const std::string& name) {
        std::vector<double> lv(g.size() + 12, 100.0);
        for (std::size_t t = 0; t < g.size(); ++t) lv[t + 12] = lv[t] * std::exp(g[t] / 100.0);
        return MonthlySeries(g.start().plus_months(-12), lv, name);
    };
    return {integrate(gy, "p"), integrate(gx, "m")};
}

const Report& shared_report() {
    static const Report rep = [] {
        PipelineConfig cfg;
        cfg.subsample_end_dates = {MonthDate(2000, 12), MonthDate(2005, 12), MonthDate(2009, 12)};
        return run_pipeline(oracles::synthetic_levels(31, 240), cfg);
    }();
    return rep;
}

std::string csv_text(const Tabular& t) {
    std::ostringstream os;
    write_tabular_csv(os, t);
    return os.str();
}

}  // namespace

TEST_CASE("report sections are populated and internally consistent") {
    const Report& rep = shared_report();
    CHECK(rep.n_obs == 240);
    CHECK(rep.sample_start == MonthDate(1991, 1));
    CHECK(rep.adf_table.size() == 4);
    CHECK(rep.skipped.empty());
    REQUIRE(rep.y_demeaned.has_value());
    REQUIRE(rep.shock_series.has_value());
    REQUIRE(rep.subsample_table.has_value());
    CHECK(rep.provenance.data_hash.size() == 16);
    CHECK(rep.provenance.config_hash.size() == 16);

    const auto ols = regress::ols_no_intercept(*rep.y_demeaned, *rep.x_demeaned);
    CHECK(rep.ols_table.coef == ols.coef);

    const auto model = sspace::TvpModel::from_series(*rep.y_demeaned, *rep.x_demeaned);
    const auto out = sspace::kalman_filter(model, rep.mle_result.params);
    const auto shocks = sspace::innovation_shocks(out);
    CHECK(shocks.shocks == rep.shock_series->shocks);
    CHECK(rep.state_paths.filtered == out.filt_mean);
    CHECK(rep.state_paths.filtered.back() == rep.mle_result.final_state);

    const auto fig7 = emit_figure_data(rep, FigureId::Subsamples);
    REQUIRE(fig7.rows.size() == rep.subsample_table->size());
    for (std::size_t i = 0; i < fig7.rows.size(); ++i) {
        CHECK(std::get<double>(fig7.rows[i][1]) == (*rep.subsample_table)[i].final_state);
    }
    const auto fig8 = emit_figure_data(rep, FigureId::Shocks);
    CHECK(fig8.columns == std::vector<std::string>{"date", "shock", "burn_in"});
    for (std::size_t i = 0; i < fig8.rows.size(); ++i) CHECK(std::get<double>(fig8.rows[i][1]) == shocks.shocks[i]);
}

TEST_CASE("figure schemas") {
    const Report& rep = shared_report();
    const auto fig3 = emit_figure_data(rep, FigureId::Cusum);
    CHECK(fig3.file_name == "fig3_cusum.csv");
    CHECK(fig3.columns == std::vector<std::string>{"date", "cusum", "band_lo", "band_hi"});
    for (const auto& row : fig3.rows) CHECK(std::get<double>(row[2]) == -std::get<double>(row[3]));

    const auto fig4 = emit_figure_data(rep, FigureId::Recursive);
    CHECK(fig4.columns == std::vector<std::string>{"date", "coef", "band_lo", "band_hi"});

    const auto fig5 = emit_figure_data(rep, FigureId::StatePath);
    CHECK(fig5.columns == std::vector<std::string>{"date", "sv1_onestep", "sv1_filtered", "sv1_smoothed"});
    CHECK(fig5.rows.size() == rep.n_obs);
    CHECK(std::get<std::string>(fig5.rows[0][0]) == "1991-01");

    const auto fig6 = emit_figure_data(rep, FigureId::Decades);
    REQUIRE(fig6.rows.size() == rep.decade_averages.size());
    for (std::size_t i = 0; i < fig6.rows.size(); ++i) {
        CHECK(std::get<std::string>(fig6.rows[i][0]) == rep.decade_averages[i].label);
        CHECK(std::get<double>(fig6.rows[i][3]) == rep.decade_averages[i].mean);
    }
    CHECK(csv_text(fig6).starts_with("decade,first,last,mean\n1990s,1991-01,1999-12,"));

    CHECK(parse_figure_id("fig5") == FigureId::StatePath);
    CHECK(parse_figure_id("8") == FigureId::Shocks);
    CHECK_THROWS_AS((void)parse_figure_id("2"), Error);

    Report empty;
    try {
        (void)emit_figure_data(empty, FigureId::Subsamples);
        FAIL("expected SectionMissing");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SectionMissing);
    }
}

TEST_CASE("sub-sample rows") {
    const Report& rep = shared_report();
    const auto& rows = *rep.subsample_table;
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].sample_start == rep.sample_start);
        if (i > 0) CHECK(rows[i].sample_end > rows[i - 1].sample_end);
        CHECK(rows[i].p_value >= 0.0);
        CHECK(rows[i].p_value <= 1.0);
        CHECK(rows[i].z == rows[i].final_state / rows[i].final_rmse);
    }

    const auto data = oracles::synthetic_levels(31, 240);
    PipelineConfig cfg;
    const auto full = subsample_final_states(data, {rep.sample_end}, cfg);
    REQUIRE(full.size() == 1);
    CHECK(full[0].final_state == rep.mle_result.final_state);
    CHECK(full[0].final_rmse == rep.mle_result.final_rmse);

    CHECK_THROWS_AS((void)subsample_final_states(data, {MonthDate(2005, 1), MonthDate(2004, 1)}, cfg), Error);
    CHECK_THROWS_AS((void)subsample_final_states(data, {MonthDate(1992, 6)}, cfg), Error);
    CHECK_THROWS_AS((void)subsample_final_states(data, {MonthDate(2030, 1)}, cfg), Error);
}

TEST_CASE("default sub-sample ends") {
    const auto ends = default_subsample_ends({1971, 1}, {2016, 3});
    REQUIRE_FALSE(ends.empty());
    CHECK(ends.front() == MonthDate(1993, 12));
    CHECK(ends.back() == MonthDate(2016, 3));
    for (std::size_t i = 1; i < ends.size(); ++i) CHECK(ends[i - 1] < ends[i]);
}

TEST_CASE("constant-coefficient data keeps final states within 2 RMSE of the truth") {
    // Pooled over draws: the state variance is estimated, so a single draw can
    // overfit a drift. The 2-RMSE band is a nominal 95% band.
    std::size_t rows = 0;
    std::size_t inside = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        simlab::TvpDgp dgp;
        dgp.n_obs = 300;
        dgp.sigma2_meas = 1.0;
        dgp.sigma2_state = 1e-12;
        dgp.alpha0 = 0.6;
        dgp.x.var = 4.0;
        dgp.seed = seed;
        dgp.start = MonthDate(1991, 1);
        const auto s = simlab::gen_tvp(dgp);
        const auto data = levels_from_growth(s.y, s.x);
        PipelineConfig cfg;
        for (const auto& r : subsample_final_states(data, {MonthDate(2005, 12), MonthDate(2010, 12), MonthDate(2015, 12)}, cfg)) {
            CHECK(r.converged);
            ++rows;
            if (std::abs(r.final_state - 0.6) < 2.0 * r.final_rmse) ++inside;
        }
    }
    CHECK(static_cast<double>(inside) / static_cast<double>(rows) >= 0.95);
}

TEST_CASE("synthetic TVP datasets recover the variances through the pipeline") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        simlab::TvpDgp dgp;
        dgp.sigma2_meas = 0.5;
        dgp.sigma2_state = 0.01;
        dgp.x.var = 4.0;
        dgp.seed = seed;
        const auto s = simlab::gen_tvp(dgp);
        const auto data = levels_from_growth(s.y, s.x);
        PipelineConfig cfg;
        cfg.subsample_end_dates = {s.y.end()};
        const auto rep = run_pipeline(data, cfg);
        const auto& m = rep.mle_result;
        CHECK(m.converged);
        CHECK(std::abs(m.params.log_var_meas - std::log(0.5)) < 4.0 * m.robust_se[0]);
        CHECK(std::abs(m.params.log_var_state - std::log(0.01)) < 4.0 * m.robust_se[1]);
        CHECK(rep.subsample_table->back().final_state == m.final_state);
    }
}

TEST_CASE("short datasets fail at the unit-root stage") {
    const auto data = oracles::synthetic_levels(5, 40);
    try {
        (void)run_pipeline(data);
        FAIL("expected a staged error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "adf");
        CHECK(e.kind() == ErrorKind::TooShort);
        CHECK(std::string(e.what()).find("adf") != std::string::npos);
    }
}

TEST_CASE("determinism and written outputs") {
    const auto data = oracles::synthetic_levels(77, 120);
    PipelineConfig cfg;
    cfg.seed = 3;
    const auto a = run_pipeline(data, cfg);
    const auto b = run_pipeline(data, cfg);
    CHECK(report_to_json(a, false).dump() == report_to_json(b, false).dump());
    CHECK(report_to_json(a, true).contains("provenance"));
    CHECK_FALSE(report_to_json(a, false)["provenance"].contains("generated_at"));

    const auto dir = std::filesystem::temp_directory_path() / ("tvp_pipe_" + std::to_string(::getpid()));
    const auto files = write_outputs(a, dir, false);
    for (const char* name : {"report.json", "table1_adf.csv", "table2_ols.csv", "table3_sspace.csv",
                             "appendixA1_subsamples.csv", "fig3_cusum.csv", "fig4_recursive.csv", "fig5_state.csv",
                             "fig6_decades.csv", "fig7_subsample.csv", "fig8_shocks.csv"}) {
        CHECK(std::filesystem::exists(dir / name));
    }
    CHECK(files.size() == 11);
    std::ifstream in(dir / "report.json");
    const auto parsed = Json::parse(in);
    CHECK(parsed["ols_table"]["coef"].get<double>() == a.ols_table.coef);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config JSON round trip and overrides") {
    PipelineConfig cfg;
    cfg.growth_mode = GrowthMode::PctChange;
    cfg.growth_units = GrowthUnits::Fraction;
    cfg.cusum_significance = 0.01;
    cfg.subsample_end_dates = {MonthDate(2000, 12)};
    cfg.mle.init = sspace::StateInit::diffuse_limit();
    cfg.adf_levels.max_lags = 4;
    const auto j = config_to_json(cfg);
    const auto back = config_from_json(j);
    CHECK(config_to_json(back).dump() == j.dump());
    CHECK(back.growth_mode == GrowthMode::PctChange);
    CHECK(back.mle.init.kind == sspace::StateInit::Kind::DiffuseLimit);

    const auto partial = config_from_json(Json::parse(R"({"cusum_significance": 0.1})"), cfg);
    CHECK(partial.cusum_significance == 0.1);
    CHECK(partial.growth_units == GrowthUnits::Fraction);
    CHECK_THROWS_AS((void)config_from_json(Json::parse(R"({"nope": 1})")), Error);
    CHECK_THROWS_AS((void)config_from_json(Json::parse(R"({"growth_mode": 3})")), Error);
}

TEST_CASE("growth units scale the estimation inputs") {
    const auto data = oracles::synthetic_levels(9, 80);
    PipelineConfig pct;
    PipelineConfig frac;
    frac.growth_units = GrowthUnits::Fraction;
    const auto [yp, xp] = growth_series(data, pct);
    const auto [yf, xf] = growth_series(data, frac);
    for (std::size_t i = 0; i < yp.size(); ++i) CHECK(yf[i] == doctest::Approx(yp[i] / 100.0).epsilon(1e-15));
}

TEST_CASE("text tables carry the published row labels") {
    const Report& rep = shared_report();
    const auto ols = ols_text(rep.ols_table, "p", "m", rep.sample_start, rep.sample_end);
    for (const char* label : {"R-squared", "Adjusted R-squared", "S.E. of regression", "Sum squared resid",
                              "Log likelihood", "Durbin-Watson stat", "Mean dependent var", "S.D. dependent var",
                              "Akaike info criterion", "Schwarz criterion", "Hannan-Quinn criter."}) {
        CHECK(ols.find(label) != std::string::npos);
    }
    const auto mle = mle_text(rep.mle_result, rep.sample_start, rep.sample_end);
    for (const char* label : {"Final State", "Root MSE", "z-Statistic", "Diffuse priors", "Parameters"}) {
        CHECK(mle.find(label) != std::string::npos);
    }
    const auto adf = adf_text(rep.adf_table);
    CHECK(adf.find("First Difference") != std::string::npos);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
