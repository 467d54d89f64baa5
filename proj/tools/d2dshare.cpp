// Command-line front end: d2dshare <subcommand> [config] [options]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/cli.hpp"
#include "d2d/errors.hpp"

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> settings;
    std::string mode;
    std::string seed;
    std::string trials;
    std::string tolerance;
    std::string output;
    std::string format;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw d2d::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int execute(d2d::cli::Subcommand sub, const Options& o) {
    using namespace d2d;
    try {
        cli::RunConfig config = o.config_path.empty() ? cli::RunConfig{} : cli::parse_config(read_file(o.config_path));
        const std::pair<const char*, const std::string*> flags[] = {{"mode", &o.mode},
                                                                     {"seed", &o.seed},
                                                                     {"trials", &o.trials},
                                                                     {"tolerance", &o.tolerance},
                                                                     {"output", &o.output},
                                                                     {"format", &o.format}};
        for (const auto& [key, value] : flags)
            if (!value->empty()) cli::apply_setting(config, key, *value, 0);
        for (const auto& s : o.settings) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
            cli::apply_setting(config, s.substr(0, eq), s.substr(eq + 1), 0);
        }
        return cli::run(config, sub, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
    }
    return cli::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    using d2d::cli::Subcommand;
    CLI::App app{"Spectrum sharing analysis for D2D underlaid/overlaid uplink cellular networks"};
    app.require_subcommand(1);

    const std::pair<Subcommand, const char*> commands[] = {
        {Subcommand::power, "average and peak transmit power versus mode threshold mu"},
        {Subcommand::analyze, "analytical SINR CCDFs and rates (--mode overlay|underlay)"},
        {Subcommand::simulate,
         "Monte Carlo SINR CCDF (--mode d2d_overlay|d2d_underlay|uplink_hex|link_length_sampling)"},
        {Subcommand::validate, "simulation versus analysis; exit 4 when the deviation exceeds --tolerance"},
        {Subcommand::optimize, "optimal eta, beta or joint (mu, eta) (--mode overlay|underlay|joint)"},
        {Subcommand::feasibility, "largest beta meeting the outage targets versus mu"},
        {Subcommand::sweep, "rates over sweep_variable/sweep_grid (--mode overlay|underlay)"},
    };

    std::vector<Options> options(std::size(commands));
    int exit_code = 0;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        const auto [sub, description] = commands[i];
        auto* cmd = app.add_subcommand(d2d::cli::to_string(sub), description);
        cmd->footer("Output columns: " + d2d::cli::column_schema(sub) +
                    "\nA JSON manifest is written next to the output as <output>.manifest.json.");
        Options& o = options[i];
        cmd->add_option("config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        cmd->add_option("--mode", o.mode, "subcommand mode");
        cmd->add_option("--seed", o.seed, "simulation seed");
        cmd->add_option("--trials", o.trials, "simulation trials");
        cmd->add_option("--tolerance", o.tolerance, "validation tolerance");
        cmd->add_option("--output,-o", o.output, "output data file");
        cmd->add_option("--format", o.format, "csv or json");
        cmd->add_option("--set", o.settings, "override any config key (key=value), repeatable");
        cmd->callback([&exit_code, sub = sub, &o] { exit_code = execute(sub, o); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : d2d::cli::kExitConfig;
    }
    return exit_code;
}
