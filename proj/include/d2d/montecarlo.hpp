#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "d2d/ccdf.hpp"
#include "d2d/model.hpp"

namespace d2d::montecarlo {

enum class Scenario { uplink_hex, d2d_overlay, d2d_underlay, link_length_sampling };

enum class Fading { rayleigh, unit };

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario scenario);

struct SimConfig {
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    // Rings of cells around the centre cell. Rings 0..hex_rings-2 are measured;
    // the outer ones only interfere.
    int hex_rings = 4;
    std::vector<double> sinr_thresholds = default_thresholds();
    Scenario scenario = Scenario::d2d_overlay;
    Fading fading = Fading::rayleigh;
    // Off: SINR = signal / noise (pipeline checks).
    bool include_interference = true;
    // PPP window radius in units of the mean nearest-interferer distance.
    double window_scale = 10.0;
    // Worker threads; 0 means std::thread::hardware_concurrency().
    unsigned threads = 0;

    void validate() const;
};

struct SimOutcome {
    CcdfCurve empirical_ccdf;
    std::uint64_t samples_collected = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    // D2D scenarios: bound b such that dropping interferers outside the window
    // lowers the interference exponent at threshold x by at most b * x.
    double truncation_bias_per_threshold = 0.0;
    double window_radius_d2d = 0.0;
    double window_radius_cellular = 0.0;
};

/// Hexagonal-grid uplink snapshot simulation. Per trial: a Poisson number of
/// cellular transmitters uniform over all cells, one random transmitter
/// scheduled per non-empty cell with channel-inversion power, Rayleigh fading on
/// every link, and the SINR of every scheduled link in a measured cell.
SimOutcome simulate_uplink_hex(const NetworkParams& params, const SimConfig& sim);

/// PPP simulation of the typical D2D receiver at the origin. Overlay: Aloha
/// (kappa) thinned D2D-mode transmitters. Underlay additionally thins by beta,
/// splits power over beta * B subchannels and adds a PPP(lambda_b) of cellular
/// interferers with in-cell link lengths.
SimOutcome simulate_d2d(const NetworkParams& params, const SimConfig& sim);

struct LinkPowerSample {
    double mean_p_c = 0.0;
    double mean_p_d = 0.0;
    std::optional<double> mean_p_d_hat;  // empty when no draw fell below mu
    std::uint64_t draws = 0;
    std::uint64_t d2d_mode_draws = 0;
};

/// Sample means of L^alpha: cellular lengths R sqrt(U), D2D lengths Rayleigh(xi),
/// split by the mode-selection threshold. `sim.trials` is the number of draws.
LinkPowerSample sample_link_powers(const NetworkParams& params, const SimConfig& sim);

/// Empirical CCDF of `samples` on the grid: fraction of samples >= threshold.
CcdfCurve empirical_ccdf(const std::vector<double>& samples, const std::vector<double>& thresholds);

}  // namespace d2d::montecarlo
