#include "d2d/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "d2d/errors.hpp"
#include "d2d/overlay.hpp"
#include "d2d/power.hpp"

namespace d2d::cli {

namespace {

using Json = nlohmann::ordered_json;

// Raised when a computed value would be written as NaN or Inf.
class NonFiniteOutput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value, int line) {
    double out = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out))
        throw ConfigError(key + ": expected a finite number, got '" + value + "'", line);
    return out;
}

std::int64_t parse_integer(const std::string& key, const std::string& value, int line) {
    std::int64_t out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError(key + ": expected an integer, got '" + value + "'", line);
    return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& value, int line) {
    const std::int64_t v = parse_integer(key, value, line);
    if (v < 0) throw ConfigError(key + ": must be nonnegative", line);
    return static_cast<std::uint64_t>(v);
}

bool parse_switch(const std::string& key, const std::string& value, int line) {
    if (value == "on" || value == "true" || value == "yes" || value == "1") return true;
    if (value == "off" || value == "false" || value == "no" || value == "0") return false;
    throw ConfigError(key + ": expected on or off, got '" + value + "'", line);
}

std::vector<double> parse_grid_at(const std::string& key, const std::string& value, int line) {
    try {
        return parse_grid(value);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what(), line);
    }
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string join_grid(const std::vector<double>& grid) {
    std::string out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) out += ",";
        out += format_number(grid[i]);
    }
    return out;
}

montecarlo::SimConfig& sim_of(RunConfig& c) {
    if (!c.sim) c.sim.emplace();
    return *c.sim;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, int)>;

Setter number(double NetworkParams::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v, int line) {
        c.params.*field = parse_double(k, v, line);
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["lambda_b"] = number(&NetworkParams::lambda_b);
        t["lambda_ue"] = number(&NetworkParams::lambda_ue);
        t["xi"] = number(&NetworkParams::xi);
        t["q"] = number(&NetworkParams::q);
        t["alpha"] = number(&NetworkParams::alpha);
        t["snr_m_db"] = number(&NetworkParams::snr_m_db);
        t["mu"] = number(&NetworkParams::mu);
        t["kappa"] = number(&NetworkParams::kappa);
        t["eta"] = number(&NetworkParams::eta);
        t["beta"] = number(&NetworkParams::beta);
        t["w_c"] = number(&NetworkParams::w_c);
        t["w_d"] = number(&NetworkParams::w_d);
        t["noise_psd_dbm_hz"] = number(&NetworkParams::noise_psd_dbm_hz);
        t["bandwidth_hz"] = number(&NetworkParams::bandwidth_hz);
        t["b_subchannels"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            const std::int64_t n = parse_integer(k, v, line);
            if (n > std::numeric_limits<int>::max() || n < std::numeric_limits<int>::min())
                throw ConfigError(k + ": out of range", line);
            c.params.b_subchannels = static_cast<int>(n);
        };
        t["bandwidth_normalization"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.params.bandwidth_normalization = parse_switch(k, v, line);
        };

        t["trials"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            sim_of(c).trials = parse_count(k, v, line);
        };
        t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            sim_of(c).seed = parse_count(k, v, line);
        };
        t["hex_rings"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            sim_of(c).hex_rings = static_cast<int>(std::clamp<std::int64_t>(parse_integer(k, v, line), -1, 1000));
        };
        t["fading"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            if (v == "rayleigh") {
                sim_of(c).fading = montecarlo::Fading::rayleigh;
            } else if (v == "unit") {
                sim_of(c).fading = montecarlo::Fading::unit;
            } else {
                throw ConfigError(k + ": expected rayleigh or unit, got '" + v + "'", line);
            }
        };
        t["include_interference"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            sim_of(c).include_interference = parse_switch(k, v, line);
        };
        t["window_scale"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            sim_of(c).window_scale = parse_double(k, v, line);
        };
        t["threads"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            sim_of(c).threads = static_cast<unsigned>(std::min<std::uint64_t>(parse_count(k, v, line), 1024));
        };

        t["sinr_min_db"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.sinr_min_db = parse_double(k, v, line);
        };
        t["sinr_max_db"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.sinr_max_db = parse_double(k, v, line);
        };
        t["sinr_points"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.sinr_points = static_cast<int>(std::clamp<std::int64_t>(parse_integer(k, v, line), 0, 1'000'000));
        };

        t["sweep_variable"] = [](RunConfig& c, const std::string&, const std::string& v, int) {
            if (!c.sweep) c.sweep.emplace();
            c.sweep->variable = v;
        };
        t["sweep_grid"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            if (!c.sweep) c.sweep.emplace();
            c.sweep->grid = parse_grid_at(k, v, line);
        };

        t["mode"] = [](RunConfig& c, const std::string&, const std::string& v, int) { c.mode = v; };
        t["output"] = [](RunConfig& c, const std::string&, const std::string& v, int) { c.output_path = v; };
        t["format"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            if (v == "csv") {
                c.format = OutputFormat::csv;
            } else if (v == "json") {
                c.format = OutputFormat::json;
            } else {
                throw ConfigError(k + ": expected csv or json, got '" + v + "'", line);
            }
        };
        t["tolerance"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.tolerance = parse_double(k, v, line);
        };
        t["mu_grid"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.mu_grid = parse_grid_at(k, v, line);
        };
        t["theta_d_db"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.outage.theta_d = db_to_linear(parse_double(k, v, line));
        };
        t["eps_d"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.outage.eps_d = parse_double(k, v, line);
        };
        t["theta_c_db"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.outage.theta_c = db_to_linear(parse_double(k, v, line));
        };
        t["eps_c"] = [](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.outage.eps_c = parse_double(k, v, line);
        };
        return t;
    }();
    return table;
}

const std::vector<std::string>& sweep_variables() {
    static const std::vector<std::string> names{"mu", "eta", "beta", "q", "snr_m_db"};
    return names;
}

void set_sweep_variable(NetworkParams& p, const std::string& name, double value) {
    if (name == "mu") {
        p.mu = value;
    } else if (name == "eta") {
        p.eta = value;
    } else if (name == "beta") {
        p.beta = value;
    } else if (name == "q") {
        p.q = value;
    } else if (name == "snr_m_db") {
        p.snr_m_db = value;
    } else {
        throw ValidationError("sweep_variable", "must be one of mu, eta, beta, q, snr_m_db; got '" + name + "'");
    }
}

std::string sweep_column(const std::string& name) {
    if (name == "mu") return "mu_m";
    return name;
}

void require_outage(const char* theta_name, double theta, const char* eps_name, double eps) {
    if (!(theta > 0.0)) throw ValidationError(theta_name, "must be > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError(eps_name, "must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Tabular output

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!std::isfinite(row[i])) throw NonFiniteOutput("non-finite value in column '" + columns[i] + "'");
        }
        rows.push_back(std::move(row));
    }
};

struct Result {
    Table table;
    Json summary = Json::object();
    bool passed = true;
};

std::string render_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
        out += "\n";
    }
    return out;
}

std::string render_json(const Table& t) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = row[i];
        rows.push_back(std::move(obj));
    }
    Json doc = Json::object();
    doc["columns"] = t.columns;
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

double finite_or_throw(double v, const char* what) {
    if (!std::isfinite(v)) throw NonFiniteOutput(std::string("non-finite value for ") + what);
    return v;
}

// Evaluates f(i) for i in [0, n) on worker threads; results keep index order
// and the lowest-index failure is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), n));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        out[i] = f(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<double> grid_or(const std::vector<double>& grid, double start, double stop, double step) {
    if (!grid.empty()) return grid;
    return parse_grid(format_number(start) + ":" + format_number(stop) + ":" + format_number(step));
}

std::string mode_or(const RunConfig& c, const std::string& fallback, const std::vector<std::string>& allowed) {
    const std::string mode = c.mode.empty() ? fallback : c.mode;
    if (std::find(allowed.begin(), allowed.end(), mode) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ValidationError("mode", "expected one of " + list + "; got '" + mode + "'");
    }
    return mode;
}

Json rates_json(const RateReport& r) {
    Json j = Json::object();
    j["r_c_nat_per_s_hz"] = finite_or_throw(r.r_c, "r_c");
    j["r_d_nat_per_s_hz"] = finite_or_throw(r.r_d, "r_d");
    j["t_c_nat_per_s_hz"] = finite_or_throw(r.t_c, "t_c");
    j["t_d_nat_per_s_hz"] = finite_or_throw(r.t_d, "t_d");
    j["t_d_hat_nat_per_s_hz"] = finite_or_throw(r.t_d_hat, "t_d_hat");
    j["utility"] = finite_or_throw(r.utility, "utility");
    return j;
}

const std::vector<std::string> kRateColumns{"r_c_nat_per_s_hz", "r_d_nat_per_s_hz", "t_c_nat_per_s_hz",
                                            "t_d_nat_per_s_hz", "t_d_hat_nat_per_s_hz", "utility"};

std::vector<double> rate_row(const RateReport& r) { return {r.r_c, r.r_d, r.t_c, r.t_d, r.t_d_hat, r.utility}; }

// ---------------------------------------------------------------------------
// Subcommands

Result run_power(const RunConfig& c) {
    Result res;
    res.table.columns = {"mu_m",
                         "avg_power_cellular_virtual",
                         "avg_power_potential_d2d_virtual",
                         "avg_power_d2d_mode_virtual",
                         "avg_power_cellular_dbm",
                         "avg_power_d2d_mode_dbm",
                         "peak_power_cellular_dbm",
                         "peak_power_d2d_dbm"};
    for (double mu : grid_or(c.mu_grid, 10.0, 1000.0, 10.0)) {
        if (!(mu > 0.0)) throw ValidationError("mu_grid", "power report needs mu > 0");
        NetworkParams p = c.params;
        p.mu = mu;
        const power::ActualPowerReport actual = power::actual_power_report(p);
        res.table.add({mu, power::avg_power_cellular(p), power::avg_power_potential_d2d(p),
                       power::avg_power_d2d_mode(p), actual.avg_cellular_dbm, actual.avg_d2d_dbm,
                       actual.peak_cellular_dbm, actual.peak_d2d_dbm});
    }
    res.summary["optimal_mode_threshold_m"] = power::optimal_mode_threshold(c.params);
    return res;
}

Result run_analyze(const RunConfig& c) {
    const std::string mode = mode_or(c, "overlay", {"overlay", "underlay"});
    const auto grid = c.thresholds();
    const NetworkParams& p = c.params;
    Result res;
    res.table.columns = {"sinr_threshold_db", "sinr_threshold_linear", "d2d_ccdf", "cellular_ccdf"};
    const CcdfCurve d2d =
        mode == "overlay" ? overlay::d2d_sinr_ccdf(p, grid) : underlay::d2d_sinr_ccdf_underlay(p, grid);
    const CcdfCurve cellular =
        mode == "overlay" ? overlay::cellular_sinr_ccdf(p, grid) : underlay::cellular_sinr_ccdf_underlay(p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        res.table.add({linear_to_db(grid[i]), grid[i], d2d.values[i], cellular.values[i]});
    }

    const DerivedQuantities d = derive(p);
    res.summary["mode"] = mode;
    res.summary["c_mu"] = d.c_mu;
    res.summary["p_d2d_mode"] = d.p_d2d_mode;
    res.summary["d2d_link_fraction"] = p.q * d.p_d2d_mode;
    res.summary["lambda_c_per_m2"] = d.lambda_c;
    res.summary["lambda_d_per_m2"] = d.lambda_d;
    res.summary["rates"] = rates_json(mode == "overlay" ? overlay::overlay_rates(p) : underlay::underlay_rates(p));
    if (mode == "overlay") {
        res.summary["r_d_max_nat_per_s_hz"] = overlay::d2d_spectral_efficiency_max(p);
        res.summary["r_d_min_nat_per_s_hz"] = overlay::d2d_spectral_efficiency_min(p);
    }
    return res;
}

montecarlo::SimConfig sim_config(const RunConfig& c, montecarlo::Scenario scenario) {
    montecarlo::SimConfig sim = c.sim.value_or(montecarlo::SimConfig{});
    sim.scenario = scenario;
    sim.sinr_thresholds = c.thresholds();
    return sim;
}

void describe_sim(Json& summary, const montecarlo::SimOutcome& out) {
    summary["samples_collected"] = out.samples_collected;
    summary["trials"] = out.trials;
    summary["seed"] = out.seed;
    if (out.window_radius_d2d > 0.0) {
        summary["window_radius_d2d_m"] = out.window_radius_d2d;
        summary["truncation_bias_per_threshold"] = out.truncation_bias_per_threshold;
    }
    if (out.window_radius_cellular > 0.0) summary["window_radius_cellular_m"] = out.window_radius_cellular;
}

Result link_power_result(const RunConfig& c, bool compare, double tolerance) {
    const montecarlo::SimConfig sim = sim_config(c, montecarlo::Scenario::link_length_sampling);
    const montecarlo::LinkPowerSample s = montecarlo::sample_link_powers(c.params, sim);
    Result res;
    res.summary["draws"] = s.draws;
    res.summary["seed"] = sim.seed;
    res.summary["d2d_mode_draws"] = s.d2d_mode_draws;
    std::vector<std::pair<std::string, double>> sampled{{"mean_power_cellular_virtual", s.mean_p_c},
                                                        {"mean_power_potential_d2d_virtual", s.mean_p_d}};
    std::vector<double> closed{power::avg_power_cellular(c.params), power::avg_power_potential_d2d(c.params)};
    if (s.mean_p_d_hat) {
        sampled.emplace_back("mean_power_d2d_mode_virtual", *s.mean_p_d_hat);
        closed.push_back(power::avg_power_d2d_mode(c.params));
    }
    std::vector<double> row;
    double worst = 0.0;
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        res.table.columns.push_back(sampled[i].first);
        row.push_back(sampled[i].second);
        if (compare) {
            const std::string stem = sampled[i].first.substr(0, sampled[i].first.size() - std::string("_virtual").size());
            res.table.columns.push_back(stem + "_closed_form_virtual");
            res.table.columns.push_back(stem + "_relative_deviation");
            const double rel = std::abs(sampled[i].second - closed[i]) / closed[i];
            row.push_back(closed[i]);
            row.push_back(rel);
            worst = std::max(worst, rel);
        }
    }
    res.table.add(row);
    if (compare) {
        res.summary["max_relative_deviation"] = worst;
        res.summary["tolerance"] = tolerance;
        res.passed = worst <= tolerance;
    }
    return res;
}

montecarlo::Scenario scenario_of(const std::string& mode) { return montecarlo::parse_scenario(mode); }

montecarlo::SimOutcome simulate_scenario(const RunConfig& c, montecarlo::Scenario scenario) {
    const montecarlo::SimConfig sim = sim_config(c, scenario);
    return scenario == montecarlo::Scenario::uplink_hex ? montecarlo::simulate_uplink_hex(c.params, sim)
                                                        : montecarlo::simulate_d2d(c.params, sim);
}

const std::vector<std::string> kScenarios{"d2d_overlay", "d2d_underlay", "uplink_hex", "link_length_sampling"};

Result compare_with_analysis(const RunConfig& c, const std::string& mode, std::optional<double> tolerance) {
    const montecarlo::Scenario scenario = scenario_of(mode);
    const montecarlo::SimOutcome out = simulate_scenario(c, scenario);
    const auto& grid = out.empirical_ccdf.thresholds;
    CcdfCurve analytical;
    switch (scenario) {
        case montecarlo::Scenario::uplink_hex: analytical = overlay::cellular_sinr_ccdf(c.params, grid); break;
        case montecarlo::Scenario::d2d_overlay: analytical = overlay::d2d_sinr_ccdf(c.params, grid); break;
        default: analytical = underlay::d2d_sinr_ccdf_underlay(c.params, grid); break;
    }
    Result res;
    res.table.columns = {"sinr_threshold_db", "sinr_threshold_linear", "empirical_ccdf", "analytical_ccdf",
                         "abs_deviation"};
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double dev = std::abs(out.empirical_ccdf.values[i] - analytical.values[i]);
        worst = std::max(worst, dev);
        res.table.add({linear_to_db(grid[i]), grid[i], out.empirical_ccdf.values[i], analytical.values[i], dev});
    }
    res.summary["scenario"] = mode;
    describe_sim(res.summary, out);
    res.summary["max_abs_deviation"] = worst;
    if (tolerance) {
        res.summary["tolerance"] = *tolerance;
        res.passed = worst <= *tolerance;
    }
    return res;
}

Result run_simulate(const RunConfig& c) {
    const std::string mode = mode_or(c, "d2d_overlay", kScenarios);
    if (mode == "link_length_sampling") return link_power_result(c, false, 0.0);
    return compare_with_analysis(c, mode, std::nullopt);
}

Result run_validate(const RunConfig& c) {
    const std::string mode = mode_or(c, "d2d_overlay", kScenarios);
    if (mode == "link_length_sampling") return link_power_result(c, true, c.tolerance.value_or(1e-3));
    const double fallback = scenario_of(mode) == montecarlo::Scenario::uplink_hex ? 0.05 : 0.02;
    return compare_with_analysis(c, mode, c.tolerance.value_or(fallback));
}

Result run_optimize(const RunConfig& c) {
    const std::string mode = mode_or(c, "overlay", {"overlay", "underlay", "joint"});
    const NetworkParams& p = c.params;
    Result res;
    res.summary["mode"] = mode;
    if (mode == "overlay") {
        const double r_c = overlay::cellular_spectral_efficiency(p);
        const double r_d = overlay::d2d_spectral_efficiency(p);
        const double eta = overlay::optimal_partition(p, r_c, r_d);
        res.table.columns = {"mu_m", "eta_star", "utility", "r_c_nat_per_s_hz", "r_d_nat_per_s_hz"};
        res.table.add({p.mu, eta, overlay::partition_utility(p, r_c, r_d, eta), r_c, r_d});
    } else if (mode == "underlay") {
        const double beta = underlay::optimal_access_factor(p);
        NetworkParams at = p;
        at.beta = beta;
        const RateReport r = underlay::underlay_rates(at);
        res.table.columns = {"mu_m", "beta_star", "utility", "t_c_nat_per_s_hz", "t_d_nat_per_s_hz"};
        res.table.add({p.mu, beta, r.utility, r.t_c, r.t_d});
    } else {
        const auto grid = grid_or(c.mu_grid, 50.0, 1000.0, 50.0);
        const overlay::JointOptimum best = overlay::joint_optimize_mu_eta(p, grid);
        res.table.columns = {"mu_star_m", "eta_star", "utility"};
        res.table.add({best.mu, best.eta, best.utility});
        res.summary["mu_grid_points"] = grid.size();
    }
    return res;
}

Result run_feasibility(const RunConfig& c) {
    const auto grid = grid_or(c.mu_grid, 20.0, 1000.0, 20.0);
    const auto curve = underlay::feasibility_curve(c.params, grid, c.outage);
    Result res;
    res.table.columns = {"mu_m", "beta_max_d2d", "beta_max_cellular", "beta_max", "cellular_feasible"};
    for (const auto& pt : curve) {
        res.table.add({pt.mu, pt.beta_max_d2d, pt.beta_max_cellular, pt.beta_max, pt.cellular_feasible ? 1.0 : 0.0});
    }
    res.summary["theta_d_db"] = linear_to_db(c.outage.theta_d);
    res.summary["eps_d"] = c.outage.eps_d;
    res.summary["theta_c_db"] = linear_to_db(c.outage.theta_c);
    res.summary["eps_c"] = c.outage.eps_c;
    return res;
}

Result run_sweep(const RunConfig& c) {
    if (!c.sweep) throw ValidationError("sweep_variable", "sweep needs sweep_variable and sweep_grid");
    const std::string mode = mode_or(c, "overlay", {"overlay", "underlay"});
    const Sweep& sweep = *c.sweep;
    const auto reports = parallel_map<RateReport>(sweep.grid.size(), [&](std::size_t i) {
        NetworkParams p = c.params;
        set_sweep_variable(p, sweep.variable, sweep.grid[i]);
        return mode == "overlay" ? overlay::overlay_rates(p) : underlay::underlay_rates(p);
    });
    Result res;
    res.table.columns = {sweep_column(sweep.variable)};
    res.table.columns.insert(res.table.columns.end(), kRateColumns.begin(), kRateColumns.end());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::vector<double> row{sweep.grid[i]};
        const auto rates = rate_row(reports[i]);
        row.insert(row.end(), rates.begin(), rates.end());
        res.table.add(std::move(row));
    }
    res.summary["mode"] = mode;
    res.summary["sweep_variable"] = sweep.variable;
    return res;
}

Result dispatch(const RunConfig& c, Subcommand s) {
    switch (s) {
        case Subcommand::power: return run_power(c);
        case Subcommand::analyze: return run_analyze(c);
        case Subcommand::simulate: return run_simulate(c);
        case Subcommand::validate: return run_validate(c);
        case Subcommand::optimize: return run_optimize(c);
        case Subcommand::feasibility: return run_feasibility(c);
        case Subcommand::sweep: return run_sweep(c);
    }
    throw std::logic_error("unhandled subcommand");
}

Json config_json(const std::string& canonical) {
    Json j = Json::object();
    std::istringstream in(canonical);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

}  // namespace

std::vector<double> RunConfig::thresholds() const {
    if (sinr_points < 1) throw ValidationError("sinr_points", "must be >= 1");
    if (sinr_points > 1 && !(sinr_max_db > sinr_min_db))
        throw ValidationError("sinr_max_db", "must exceed sinr_min_db");
    return log_spaced_thresholds(sinr_min_db, sinr_max_db, static_cast<std::size_t>(sinr_points));
}

Subcommand parse_subcommand(const std::string& name) {
    static const std::map<std::string, Subcommand> names{
        {"power", Subcommand::power},       {"analyze", Subcommand::analyze},
        {"simulate", Subcommand::simulate}, {"validate", Subcommand::validate},
        {"optimize", Subcommand::optimize}, {"feasibility", Subcommand::feasibility},
        {"sweep", Subcommand::sweep}};
    const auto it = names.find(name);
    if (it == names.end()) throw ConfigError("unknown subcommand '" + name + "'");
    return it->second;
}

std::string to_string(Subcommand s) {
    switch (s) {
        case Subcommand::power: return "power";
        case Subcommand::analyze: return "analyze";
        case Subcommand::simulate: return "simulate";
        case Subcommand::validate: return "validate";
        case Subcommand::optimize: return "optimize";
        case Subcommand::feasibility: return "feasibility";
        case Subcommand::sweep: return "sweep";
    }
    return "unknown";
}

std::vector<double> parse_grid(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.empty()) throw ConfigError("empty grid");
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(trim(part));
        if (parts.size() != 3) throw ConfigError("range grid must be start:stop:step");
        const double start = parse_double("start", parts[0], 0);
        const double stop = parse_double("stop", parts[1], 0);
        const double step = parse_double("step", parts[2], 0);
        if (!(step > 0.0) || stop < start) throw ConfigError("range grid needs step > 0 and stop >= start");
        const double span = (stop - start) / step;
        if (span > 1e7) throw ConfigError("range grid has too many points");
        // Tolerate rounding so that 50:1000:50 includes 1000.
        const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) grid.push_back(start + step * static_cast<double>(i));
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(parse_double("grid value", trim(item), 0));
    return grid;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value, int line) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'", line);
    if (value.empty()) throw ConfigError(key + ": missing value", line);
    it->second(config, key, value, line);
}

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::map<std::string, int> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        if (const auto [it, fresh] = seen.emplace(key, line_no); !fresh)
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")",
                              line_no);
        apply_setting(config, key, value, line_no);
        if (end == text.size()) break;
    }
    validate_config(config);
    return config;
}

void validate_config(const RunConfig& c) {
    derive(c.params);
    if (c.sim) c.sim->validate();
    c.thresholds();
    if (c.sweep) {
        if (c.sweep->variable.empty()) throw ValidationError("sweep_variable", "sweep_grid given without sweep_variable");
        if (c.sweep->grid.empty()) throw ValidationError("sweep_grid", "sweep_variable given without sweep_grid");
        if (std::find(sweep_variables().begin(), sweep_variables().end(), c.sweep->variable) ==
            sweep_variables().end())
            throw ValidationError("sweep_variable",
                                  "must be one of mu, eta, beta, q, snr_m_db; got '" + c.sweep->variable + "'");
        for (double v : c.sweep->grid) {
            NetworkParams p = c.params;
            set_sweep_variable(p, c.sweep->variable, v);
            try {
                derive(p);
            } catch (const ValidationError& e) {
                throw ValidationError("sweep_grid", "value " + format_number(v) + " violates " + e.what());
            }
        }
    }
    for (double mu : c.mu_grid)
        if (!(mu > 0.0)) throw ValidationError("mu_grid", "values must be > 0");
    if (c.tolerance && !(*c.tolerance > 0.0)) throw ValidationError("tolerance", "must be > 0");
    require_outage("theta_d_db", c.outage.theta_d, "eps_d", c.outage.eps_d);
    require_outage("theta_c_db", c.outage.theta_c, "eps_c", c.outage.eps_c);
    if (c.output_path.empty()) throw ValidationError("output", "must not be empty");
}

std::string canonical_config(const RunConfig& c) {
    const NetworkParams& p = c.params;
    const montecarlo::SimConfig sim = c.sim.value_or(montecarlo::SimConfig{});
    std::vector<std::pair<std::string, std::string>> kv{
        {"lambda_b", format_number(p.lambda_b)},
        {"lambda_ue", format_number(p.lambda_ue)},
        {"xi", format_number(p.xi)},
        {"q", format_number(p.q)},
        {"alpha", format_number(p.alpha)},
        {"snr_m_db", format_number(p.snr_m_db)},
        {"mu", format_number(p.mu)},
        {"kappa", format_number(p.kappa)},
        {"eta", format_number(p.eta)},
        {"beta", format_number(p.beta)},
        {"b_subchannels", std::to_string(p.b_subchannels)},
        {"w_c", format_number(p.w_c)},
        {"w_d", format_number(p.w_d)},
        {"noise_psd_dbm_hz", format_number(p.noise_psd_dbm_hz)},
        {"bandwidth_hz", format_number(p.bandwidth_hz)},
        {"bandwidth_normalization", p.bandwidth_normalization ? "on" : "off"},
        {"trials", std::to_string(sim.trials)},
        {"seed", std::to_string(sim.seed)},
        {"hex_rings", std::to_string(sim.hex_rings)},
        {"fading", sim.fading == montecarlo::Fading::rayleigh ? "rayleigh" : "unit"},
        {"include_interference", sim.include_interference ? "on" : "off"},
        {"window_scale", format_number(sim.window_scale)},
        {"sinr_min_db", format_number(c.sinr_min_db)},
        {"sinr_max_db", format_number(c.sinr_max_db)},
        {"sinr_points", std::to_string(c.sinr_points)},
        {"mode", c.mode},
        {"tolerance", c.tolerance ? format_number(*c.tolerance) : ""},
        {"mu_grid", join_grid(c.mu_grid)},
        {"theta_d_db", format_number(linear_to_db(c.outage.theta_d))},
        {"eps_d", format_number(c.outage.eps_d)},
        {"theta_c_db", format_number(linear_to_db(c.outage.theta_c))},
        {"eps_c", format_number(c.outage.eps_c)},
        {"sweep_variable", c.sweep ? c.sweep->variable : ""},
        {"sweep_grid", c.sweep ? join_grid(c.sweep->grid) : ""},
        {"format", c.format == OutputFormat::csv ? "csv" : "json"},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string git_blob_hash(std::string_view content) {
    const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &length) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xF];
    }
    return hex;
}

int run(const RunConfig& config, Subcommand subcommand, std::ostream& log) {
    try {
        validate_config(config);
        const Result result = dispatch(config, subcommand);
        const std::string data =
            config.format == OutputFormat::csv ? render_csv(result.table) : render_json(result.table);
        write_file(config.output_path, data);

        const std::string canonical = canonical_config(config);
        Json manifest = Json::object();
        manifest["tool"] = "d2dshare";
        manifest["subcommand"] = to_string(subcommand);
        manifest["config_hash"] = git_blob_hash(canonical);
        manifest["config"] = config_json(canonical);
        manifest["output"] = config.output_path;
        manifest["output_hash"] = git_blob_hash(data);
        manifest["columns"] = result.table.columns;
        manifest["rows"] = result.table.rows.size();
        manifest["summary"] = result.summary;
        if (subcommand == Subcommand::validate) manifest["status"] = result.passed ? "pass" : "fail";
        write_file(config.output_path + ".manifest.json", manifest.dump(2) + "\n");

        log << to_string(subcommand) << ": wrote " << result.table.rows.size() << " rows to " << config.output_path
            << "\n";
        if (!result.passed) {
            log << "validate: FAIL, deviation exceeds tolerance (see manifest summary)\n";
            return kExitValidationFailure;
        }
        if (subcommand == Subcommand::validate) log << "validate: PASS\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        log << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        log << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NonFiniteOutput& e) {
        log << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        log << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

std::string column_schema(Subcommand s) {
    switch (s) {
        case Subcommand::power:
            return "mu_m, avg_power_cellular_virtual, avg_power_potential_d2d_virtual, avg_power_d2d_mode_virtual, "
                   "avg_power_cellular_dbm, avg_power_d2d_mode_dbm, peak_power_cellular_dbm, peak_power_d2d_dbm";
        case Subcommand::analyze:
            return "sinr_threshold_db, sinr_threshold_linear, d2d_ccdf, cellular_ccdf (rates in the manifest)";
        case Subcommand::simulate:
            return "sinr_threshold_db, sinr_threshold_linear, empirical_ccdf, analytical_ccdf, abs_deviation; "
                   "link_length_sampling: mean_power_*_virtual";
        case Subcommand::validate:
            return "sinr_threshold_db, sinr_threshold_linear, empirical_ccdf, analytical_ccdf, abs_deviation; "
                   "link_length_sampling: sampled, closed-form and relative deviation per power mean";
        case Subcommand::optimize:
            return "overlay: mu_m, eta_star, utility, r_c_nat_per_s_hz, r_d_nat_per_s_hz; underlay: mu_m, beta_star, "
                   "utility, t_c_nat_per_s_hz, t_d_nat_per_s_hz; joint: mu_star_m, eta_star, utility";
        case Subcommand::feasibility:
            return "mu_m, beta_max_d2d, beta_max_cellular, beta_max, cellular_feasible (1 or 0)";
        case Subcommand::sweep:
            return "<variable>, r_c_nat_per_s_hz, r_d_nat_per_s_hz, t_c_nat_per_s_hz, t_d_nat_per_s_hz, "
                   "t_d_hat_nat_per_s_hz, utility";
    }
    return {};
}

}  // namespace d2d::cli
