#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/cli.hpp"
#include "d2d/errors.hpp"
#include "doctest.h"

using namespace d2d;
using namespace d2d::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "d2dshare_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        FAIL("missing column " << name);
        return 0;
    }
};

Csv read_csv(const fs::path& path) {
    Csv csv;
    std::istringstream in(slurp(path));
    std::string line;
    std::getline(in, line);
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) csv.header.push_back(cell);
    while (std::getline(in, line)) {
        std::stringstream rs(line);
        std::vector<double> row;
        for (std::string cell; std::getline(rs, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

RunConfig config_for(const std::string& text, const std::string& file) {
    RunConfig c = parse_config(text);
    c.output_path = (scratch_dir() / file).string();
    return c;
}

int run_quiet(const RunConfig& c, Subcommand s) {
    std::ostringstream log;
    return run(c, s, log);
}

}  // namespace

TEST_CASE("empty document yields the reference defaults") {
    const RunConfig c = parse_config("");
    const double lb = 1.0 / (M_PI * 500.0 * 500.0);
    CHECK(c.params.lambda_b == doctest::Approx(lb).epsilon(1e-15));
    CHECK(c.params.lambda_ue == doctest::Approx(10 * lb).epsilon(1e-15));
    CHECK(c.params.xi == doctest::Approx(10 * lb).epsilon(1e-15));
    CHECK(c.params.q == 0.2);
    CHECK(c.params.alpha == 3.5);
    CHECK(c.params.snr_m_db == 10.0);
    CHECK(c.params.mu == 200.0);
    CHECK(c.params.kappa == 1.0);
    CHECK(c.params.eta == 0.2);
    CHECK(c.params.w_c == 0.6);
    CHECK(c.params.w_d == 0.4);
    CHECK(c.params.beta == 1.0);
    CHECK(c.params.b_subchannels == 1);
    CHECK_FALSE(c.sim.has_value());
    CHECK_FALSE(c.sweep.has_value());
}

TEST_CASE("parse errors carry the line number and validation errors the field") {
    try {
        parse_config("q = 0.3\n\n# comment\nalpha = 1.5\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "alpha");
    }
    auto line_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("q = 0.3\nbogus_key = 1\n") == 2);
    CHECK(line_of("\n\nmu = twelve\n") == 3);
    CHECK(line_of("mu = 100\nmu = 200\n") == 2);
    CHECK(line_of("mu 100\n") == 1);
    CHECK(line_of("seed = -1\n") == 1);
    CHECK(line_of("mu = 1e999\n") == 1);
    CHECK(line_of("mu = 100 # trailing comment\n") == -1);
}

TEST_CASE("grids expand ranges inclusively and read lists") {
    const auto g = parse_grid("50:1000:50");
    REQUIRE(g.size() == 20);
    CHECK(g.front() == 50.0);
    CHECK(g.back() == doctest::Approx(1000.0));
    CHECK(parse_grid("0.1:1.0:0.1").size() == 10);
    CHECK(parse_grid("1, 2.5 ,4") == std::vector<double>{1.0, 2.5, 4.0});
    CHECK_THROWS_AS(parse_grid("1:0:1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1:2"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1:2:0"), ConfigError);
    CHECK_THROWS_AS(parse_grid(""), ConfigError);

    const RunConfig c = parse_config("sweep_variable = mu\nsweep_grid = 50:1000:50\n");
    REQUIRE(c.sweep);
    CHECK(c.sweep->variable == "mu");
    CHECK(c.sweep->grid.size() == 20);
}

TEST_CASE("sweep variables and grid values are checked") {
    CHECK_THROWS_AS(parse_config("sweep_variable = alpha\nsweep_grid = 3:4:0.5\n"), ValidationError);
    try {
        parse_config("sweep_variable = q\nsweep_grid = 0.5,1.5\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "sweep_grid");
    }
    CHECK_THROWS_AS(parse_config("sweep_grid = 1,2\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("sweep_variable = mu\n"), ValidationError);
}

TEST_CASE("simulation keys engage the simulation block") {
    const RunConfig c = parse_config("trials = 500\nseed = 9\nfading = unit\ninclude_interference = off\n");
    REQUIRE(c.sim);
    CHECK(c.sim->trials == 500);
    CHECK(c.sim->seed == 9);
    CHECK(c.sim->fading == montecarlo::Fading::unit);
    CHECK_FALSE(c.sim->include_interference);
    CHECK_THROWS_AS(parse_config("fading = nakagami\n"), ConfigError);
}

TEST_CASE("git blob hashes match git hash-object") {
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("canonical configuration is stable and sensitive to values") {
    const RunConfig a = parse_config("mu = 300\n");
    RunConfig b = parse_config("\n  mu=300   # same value\n");
    b.output_path = "elsewhere.csv";
    CHECK(canonical_config(a) == canonical_config(b));
    const RunConfig c = parse_config("mu = 300.5\n");
    CHECK(canonical_config(a) != canonical_config(c));
}

TEST_CASE("overlay sweep over mu has the expected shape") {
    const RunConfig c = config_for("sweep_variable = mu\nsweep_grid = 50:1000:50\n", "sweep.csv");
    REQUIRE(run_quiet(c, Subcommand::sweep) == kExitOk);
    const Csv csv = read_csv(c.output_path);
    REQUIRE(csv.rows.size() == 20);
    CHECK(csv.header.front() == "mu_m");
    const auto tc = csv.column("t_c_nat_per_s_hz");
    const auto td = csv.column("t_d_nat_per_s_hz");
    std::size_t peak = 0;
    for (std::size_t i = 1; i < csv.rows.size(); ++i) {
        CHECK(csv.rows[i][tc] >= csv.rows[i - 1][tc]);
        if (csv.rows[i][td] > csv.rows[peak][td]) peak = i;
    }
    CHECK(peak > 0);
    CHECK(peak + 1 < csv.rows.size());
    for (std::size_t i = 1; i <= peak; ++i) CHECK(csv.rows[i][td] > csv.rows[i - 1][td]);
    // Past a few hundred metres almost every potential pair is in D2D mode and the
    // rate flattens out to rounding, so only the first post-peak steps are strict.
    CHECK(csv.rows[peak + 1][td] < csv.rows[peak][td]);
    for (std::size_t i = peak + 1; i < csv.rows.size(); ++i) CHECK(csv.rows[i][td] <= csv.rows[i - 1][td]);

    const auto manifest = nlohmann::json::parse(slurp(c.output_path + ".manifest.json"));
    CHECK(manifest["subcommand"] == "sweep");
    CHECK(manifest["rows"] == 20);
    CHECK(manifest["config_hash"] == git_blob_hash(canonical_config(c)));
}

TEST_CASE("optimize overlay at a large threshold returns the D2D weight") {
    const RunConfig c = config_for("mode = overlay\nmu = 2000\n", "opt.csv");
    REQUIRE(run_quiet(c, Subcommand::optimize) == kExitOk);
    const Csv csv = read_csv(c.output_path);
    REQUIRE(csv.rows.size() == 1);
    CHECK(csv.rows[0][csv.column("eta_star")] == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("validate d2d_overlay passes at the reference point") {
    const RunConfig c = config_for("mode = d2d_overlay\ntolerance = 0.02\ntrials = 10000\n", "val.csv");
    REQUIRE(run_quiet(c, Subcommand::validate) == kExitOk);
    const Csv csv = read_csv(c.output_path);
    CHECK(csv.rows.size() == 60);
    const auto dev = csv.column("abs_deviation");
    for (const auto& row : csv.rows) CHECK(row[dev] <= 0.02);
    const auto manifest = nlohmann::json::parse(slurp(c.output_path + ".manifest.json"));
    CHECK(manifest["status"] == "pass");
    CHECK(manifest["summary"]["trials"] == 10000);
}

TEST_CASE("validate reports failure with its own exit code") {
    const RunConfig c = config_for("mode = d2d_overlay\ntolerance = 1e-9\ntrials = 200\n", "valfail.csv");
    CHECK(run_quiet(c, Subcommand::validate) == kExitValidationFailure);
    const auto manifest = nlohmann::json::parse(slurp(c.output_path + ".manifest.json"));
    CHECK(manifest["status"] == "fail");
}

TEST_CASE("identical configuration and seed give byte-identical files") {
    for (Subcommand s : {Subcommand::simulate, Subcommand::power, Subcommand::feasibility}) {
        RunConfig a = config_for("trials = 2000\nseed = 17\n", "rep_a.csv");
        RunConfig b = a;
        b.output_path = (scratch_dir() / "rep_b.csv").string();
        b.sim->threads = 1;
        REQUIRE(run_quiet(a, s) == kExitOk);
        REQUIRE(run_quiet(b, s) == kExitOk);
        CHECK(slurp(a.output_path) == slurp(b.output_path));
        CHECK(slurp(a.output_path + ".manifest.json").size() > 0);
    }
}

TEST_CASE("every subcommand writes finite values under a unit-bearing header") {
    const std::vector<std::pair<Subcommand, std::string>> cases{
        {Subcommand::power, ""},
        {Subcommand::analyze, "mode = overlay\n"},
        {Subcommand::analyze, "mode = underlay\nbeta = 0.5\n"},
        {Subcommand::simulate, "mode = link_length_sampling\ntrials = 10000\n"},
        {Subcommand::optimize, "mode = underlay\n"},
        {Subcommand::optimize, "mode = joint\nmu_grid = 100:600:100\n"},
        {Subcommand::feasibility, ""},
        {Subcommand::sweep, "mode = underlay\nsweep_variable = beta\nsweep_grid = 0.2:1:0.2\n"},
    };
    for (const auto& [sub, text] : cases) {
        CAPTURE(to_string(sub));
        CAPTURE(text);
        const RunConfig c = config_for(text, "all.csv");
        REQUIRE(run_quiet(c, sub) == kExitOk);
        const Csv csv = read_csv(c.output_path);
        CHECK_FALSE(csv.rows.empty());
        for (const auto& row : csv.rows) {
            CHECK(row.size() == csv.header.size());
            for (double v : row) CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("json output carries the same rows") {
    RunConfig c = config_for("format = json\n", "power.json");
    REQUIRE(run_quiet(c, Subcommand::power) == kExitOk);
    const auto doc = nlohmann::json::parse(slurp(c.output_path));
    CHECK(doc["rows"].size() == 100);
    CHECK(doc["rows"][0].contains("avg_power_cellular_virtual"));
}

TEST_CASE("error classes map to exit codes") {
    RunConfig bad_mode = config_for("mode = mesh\n", "bad.csv");
    CHECK(run_quiet(bad_mode, Subcommand::analyze) == kExitConfig);
    RunConfig bad_params = config_for("", "bad.csv");
    bad_params.params.q = 2.0;
    CHECK(run_quiet(bad_params, Subcommand::analyze) == kExitConfig);
    RunConfig no_sweep = config_for("", "bad.csv");
    CHECK(run_quiet(no_sweep, Subcommand::sweep) == kExitConfig);
    RunConfig bad_path = config_for("", "bad.csv");
    bad_path.output_path = (scratch_dir() / "no_such_dir" / "x.csv").string();
    CHECK(run_quiet(bad_path, Subcommand::power) == kExitConfig);
    CHECK_THROWS_AS(parse_subcommand("plot"), ConfigError);
    for (const char* name : {"power", "analyze", "simulate", "validate", "optimize", "feasibility", "sweep"})
        CHECK(to_string(parse_subcommand(name)) == name);
}
