#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/model.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/underlay.hpp"

namespace d2d::cli {

enum class Subcommand { power, analyze, simulate, validate, optimize, feasibility, sweep };
enum class OutputFormat { csv, json };

Subcommand parse_subcommand(const std::string& name);
std::string to_string(Subcommand subcommand);

struct Sweep {
    std::string variable;  // one of mu, eta, beta, q, snr_m_db
    std::vector<double> grid;
};

struct RunConfig {
    NetworkParams params;
    std::optional<montecarlo::SimConfig> sim;
    std::optional<Sweep> sweep;
    std::string output_path = "d2dshare_out.csv";
    OutputFormat format = OutputFormat::csv;

    // Subcommand controls. An empty mode picks the subcommand default.
    std::string mode;
    std::optional<double> tolerance;
    std::vector<double> mu_grid;
    underlay::OutageTargets outage;

    // SINR threshold grid for CCDF output, log-spaced in dB.
    double sinr_min_db = -20.0;
    double sinr_max_db = 40.0;
    int sinr_points = 60;

    std::vector<double> thresholds() const;
};

/// Parses a flat `key = value` document. Blank lines and text after `#` are
/// ignored. Unknown keys and malformed values raise ConfigError carrying the
/// 1-based line number; parameter invariants raise ValidationError naming the
/// field.
RunConfig parse_config(std::string_view text);

/// Applies one `key = value` assignment on top of an existing configuration,
/// with the same key set and checks as parse_config. `line` is reported in
/// errors.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value, int line);

/// Re-checks every invariant after overrides have been applied.
void validate_config(const RunConfig& config);

/// Expands `start:stop:step` (inclusive of stop up to rounding) or a
/// comma-separated list.
std::vector<double> parse_grid(const std::string& text);

/// Canonical `key = value` listing of the resolved configuration, one key per
/// line in a fixed order. It is what the manifest hash covers.
std::string canonical_config(const RunConfig& config);

/// Git blob object id (SHA-1 over "blob <size>\0<content>") in lowercase hex.
std::string git_blob_hash(std::string_view content);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitValidationFailure = 4;

/// Runs one subcommand, writes the data file to `config.output_path` and the
/// JSON manifest next to it (`<output>.manifest.json`). Messages go to `log`.
/// Returns the process exit code; library errors are mapped to exit codes
/// rather than propagated.
int run(const RunConfig& config, Subcommand subcommand, std::ostream& log);

/// Column schema of each subcommand's data file, for `--help`.
std::string column_schema(Subcommand subcommand);

}  // namespace d2d::cli
