#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <doctest.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "tvp/error.hpp"
#include "tvp/report_io.hpp"

namespace fs = std::filesystem;
using tvp::Json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = tvp::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("tvp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n_++))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }
    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int n_ = 0;
    fs::path path_;
};

std::string write_dataset(const TempDir& dir, const tvp::Dataset& data, const std::string& name = "data.csv") {
    std::ofstream f(dir.file(name), std::ios::binary);
    tvp::write_csv(f, data);
    return dir.file(name);
}

}  // namespace

TEST_CASE("help output matches the snapshot") {
    const auto r = run({"--help-all"});
    CHECK(r.code == 0);
    const std::string expected = slurp(fs::path(TVP_SNAPSHOT_DIR) / "cli_help.txt");
    REQUIRE_FALSE(expected.empty());
    CHECK(r.out == expected);
    for (const char* flag : {"--input", "--y-col", "--x-col", "--config", "--growth-mode", "--growth-units", "--format",
                             "--out", "--max-lags", "--cusum-sig", "--subsample-ends", "--seed", "--threads",
                             "--reps", "--n-obs", "--reps-csv", "--no-timestamp"}) {
        CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
    }
    for (const char* cmd : {"validate", "adf", "ols", "cusum", "recursive", "sspace", "pipeline", "subsample",
                            "simulate"}) {
        CHECK_MESSAGE(r.out.find(cmd) != std::string::npos, cmd);
    }
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"ols", "--help"}).code == 0);
}

TEST_CASE("usage errors exit 64") {
    CHECK(run({}).code == 64);
    CHECK(run({"ols", "--input", "x.csv", "--bogus"}).code == 64);
    CHECK(run({"frobnicate"}).code == 64);
    CHECK(run({"cusum", "--input", "x.csv", "--cusum-sig", "0.2"}).code == 64);
    CHECK(run({"ols"}).code == 64);
}

TEST_CASE("missing input exits 1 and names the path") {
    const auto r = run({"ols", "--input", "/nonexistent/levels.csv"});
    CHECK(r.code == 1);
    CHECK(r.err.find("/nonexistent/levels.csv") != std::string::npos);
}

TEST_CASE("malformed data exits 1") {
    TempDir dir;
    {
        std::ofstream f(dir.file("bad.csv"));
        f << "date,p,m\n2000-01,1,2\n2000-03,1,2\n";
    }
    CHECK(run({"validate", "--input", dir.file("bad.csv")}).code == 1);
}

TEST_CASE("degenerate regressor exits 2") {
    TempDir dir;
    const auto base = oracles::synthetic_levels(4, 80);
    std::vector<double> flat(base.size(), 50.0);
    const tvp::Dataset data(base.y_raw(), tvp::MonthlySeries(base.y_raw().start(), flat, "m2"));
    const auto path = write_dataset(dir, data);
    const auto r = run({"ols", "--input", path});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("single-module commands") {
    TempDir dir;
    const auto path = write_dataset(dir, oracles::synthetic_levels(12, 150));
    const auto ols = run({"ols", "--input", path});
    REQUIRE(ols.code == 0);
    const auto j = Json::parse(ols.out);
    CHECK(j.contains("coef"));

    const auto text = run({"ols", "--input", path, "--format", "text"});
    CHECK(text.out.find("R-squared") != std::string::npos);
    const auto csv = run({"cusum", "--input", path, "--format", "csv", "--cusum-sig", "0.01"});
    CHECK(csv.code == 0);
    CHECK(csv.out.starts_with("date,cusum,band_lo,band_hi\n"));
    CHECK(run({"adf", "--input", path, "--format", "csv"}).out.starts_with("variable,transform,"));
    CHECK(run({"recursive", "--input", path}).code == 0);
    CHECK(run({"sspace", "--input", path, "--format", "text"}).out.find("Final State") != std::string::npos);
    const auto sub = run({"subsample", "--input", path, "--subsample-ends", "2000-12,2002-06"});
    REQUIRE(sub.code == 0);
    CHECK(Json::parse(sub.out).size() == 2);
    CHECK(run({"subsample", "--input", path, "--subsample-ends", "2002-06,2000-12"}).code == 1);
}

TEST_CASE("pipeline writes its outputs") {
    TempDir dir;
    const auto path = write_dataset(dir, oracles::synthetic_levels(21, 180));
    const auto out_dir = dir.file("out");
    const auto r = run({"pipeline", "--input", path, "--out", out_dir, "--no-timestamp", "--format", "text"});
    REQUIRE(r.code == 0);
    for (const char* name : {"report.json", "table1_adf.csv", "table2_ols.csv", "table3_sspace.csv",
                             "appendixA1_subsamples.csv", "fig3_cusum.csv", "fig4_recursive.csv", "fig5_state.csv",
                             "fig6_decades.csv", "fig7_subsample.csv", "fig8_shocks.csv"}) {
        CHECK_MESSAGE(fs::exists(fs::path(out_dir) / name), name);
    }
    const std::string first = slurp(fs::path(out_dir) / "report.json");
    REQUIRE(run({"pipeline", "--input", path, "--out", out_dir, "--no-timestamp"}).code == 0);
    CHECK(slurp(fs::path(out_dir) / "report.json") == first);
    CHECK_FALSE(Json::parse(first)["provenance"].contains("generated_at"));
    CHECK(run({"pipeline", "--input", path}).code == 64);
}

TEST_CASE("simulate is reproducible for a fixed seed") {
    const auto a = run({"simulate", "mle", "--reps", "200", "--seed", "7"});
    const auto b = run({"simulate", "mle", "--reps", "200", "--seed", "7", "--threads", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto j = Json::parse(a.out);
    CHECK(j["estimator"] == "mle");
    CHECK(j["n_reps"] == 200);
    CHECK(run({"simulate", "adf", "--reps", "5"}).code == 1);
    CHECK(run({"simulate", "ols"}).code == 64);

    TempDir dir;
    const auto reps_csv = dir.file("reps.csv");
    REQUIRE(run({"simulate", "cusum", "--reps", "20", "--n-obs", "120", "--reps-csv", reps_csv}).code == 0);
    std::ifstream in(reps_csv);
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 21);
}

TEST_CASE("config file sits between defaults and flags") {
    TempDir dir;
    const auto path = write_dataset(dir, oracles::synthetic_levels(3, 150));
    {
        std::ofstream f(dir.file("cfg.json"));
        f << R"({"cusum_significance": 0.1, "growth_units": "fraction"})";
    }
    const auto from_file = Json::parse(run({"cusum", "--input", path, "--config", dir.file("cfg.json")}).out);
    CHECK(from_file["significance"] == 0.1);
    const auto overridden =
        Json::parse(run({"cusum", "--input", path, "--config", dir.file("cfg.json"), "--cusum-sig", "0.01"}).out);
    CHECK(overridden["significance"] == 0.01);
    const auto plain = Json::parse(run({"cusum", "--input", path}).out);
    CHECK(plain["significance"] == 0.05);

    const auto pct = Json::parse(run({"ols", "--input", path}).out);
    const auto frac = Json::parse(run({"ols", "--input", path, "--config", dir.file("cfg.json")}).out);
    const auto frac_flag = Json::parse(
        run({"ols", "--input", path, "--config", dir.file("cfg.json"), "--growth-units", "percent"}).out);
    CHECK(pct["coef"].get<double>() == doctest::Approx(frac["coef"].get<double>()).epsilon(1e-12));
    CHECK(frac["ssr"].get<double>() == doctest::Approx(pct["ssr"].get<double>() * 1e-4).epsilon(1e-10));
    CHECK(frac_flag["ssr"] == pct["ssr"]);

    {
        std::ofstream f(dir.file("bad.json"));
        f << R"({"unknown_key": 1})";
    }
    CHECK(run({"ols", "--input", path, "--config", dir.file("bad.json")}).code == 1);
}
