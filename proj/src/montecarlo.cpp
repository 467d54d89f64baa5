#include "d2d/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <thread>

#include "d2d/errors.hpp"
#include "d2d/power.hpp"
#include "d2d/rng.hpp"

namespace d2d::montecarlo {

namespace {

// Substream ids within one trial.
enum Stream : std::uint32_t {
    kPlacement = 0,
    kFading = 1,
    kThinning = 2,
    kCellularField = 3,
};

constexpr std::uint64_t kTrialsPerChunk = 256;

// Runs body(chunk) for every chunk on up to `threads` workers. Chunk
// boundaries do not depend on the thread count, so results are identical to a
// sequential run.
void for_each_chunk(std::uint64_t chunks, unsigned threads, const std::function<void(std::uint64_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
    if (threads <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (std::uint64_t c = next++; c < chunks; c = next++) {
                try {
                    body(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
}

// Collects per-trial SINR samples chunk by chunk and concatenates them in
// trial order.
std::vector<double> run_trials(const SimConfig& sim,
                               const std::function<void(std::uint64_t, std::vector<double>&)>& trial) {
    const std::uint64_t chunks = (sim.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
    std::vector<std::vector<double>> per_chunk(chunks);
    for_each_chunk(chunks, sim.threads, [&](std::uint64_t c) {
        const std::uint64_t first = c * kTrialsPerChunk;
        const std::uint64_t last = std::min(sim.trials, first + kTrialsPerChunk);
        for (std::uint64_t t = first; t < last; ++t) trial(t, per_chunk[c]);
    });
    std::vector<double> samples;
    for (auto& chunk : per_chunk) samples.insert(samples.end(), chunk.begin(), chunk.end());
    return samples;
}

double fading_gain(rng::CounterRng& rng, Fading fading) {
    return fading == Fading::rayleigh ? rng.exponential() : 1.0;
}

struct Point {
    double x;
    double y;
};

// Pointy-top hexagonal layout with cell area 1 / lambda_b.
struct HexLayout {
    double circumradius = 0.0;
    std::vector<Point> centers;
    std::vector<int> ring;

    HexLayout(double lambda_b, int rings) {
        circumradius = std::sqrt(2.0 / (3.0 * std::sqrt(3.0) * lambda_b));
        for (int q = -rings; q <= rings; ++q) {
            for (int r = -rings; r <= rings; ++r) {
                const int k = std::max({std::abs(q), std::abs(r), std::abs(q + r)});
                if (k > rings) continue;
                centers.push_back({circumradius * std::sqrt(3.0) * (q + r / 2.0), circumradius * 1.5 * r});
                ring.push_back(k);
            }
        }
    }

    // Uniform point in cell `cell`: the hexagon is three rhombi spanned by
    // alternate vertex vectors.
    Point sample_in_cell(std::size_t cell, rng::CounterRng& rng) const {
        const int rhombus = std::min(2, static_cast<int>(3.0 * rng.uniform()));
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double theta0 = std::numbers::pi / 2.0 + rhombus * 2.0 * std::numbers::pi / 3.0;
        const double theta1 = theta0 + 2.0 * std::numbers::pi / 3.0;
        return {centers[cell].x + circumradius * (a * std::cos(theta0) + b * std::cos(theta1)),
                centers[cell].y + circumradius * (a * std::sin(theta0) + b * std::sin(theta1))};
    }
};

// Rayleigh(xi) length conditioned on D < mu, by inverse CDF.
double truncated_rayleigh(double xi, double p_below_mu, double u) {
    return std::sqrt(-std::log1p(-u * p_below_mu) / (xi * std::numbers::pi));
}

double mean_nearest_distance(double density) { return 0.5 / std::sqrt(density); }

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "uplink_hex") return Scenario::uplink_hex;
    if (name == "d2d_overlay") return Scenario::d2d_overlay;
    if (name == "d2d_underlay") return Scenario::d2d_underlay;
    if (name == "link_length_sampling") return Scenario::link_length_sampling;
    throw ValidationError("scenario", "unknown scenario '" + name + "'");
}

std::string to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::uplink_hex: return "uplink_hex";
        case Scenario::d2d_overlay: return "d2d_overlay";
        case Scenario::d2d_underlay: return "d2d_underlay";
        case Scenario::link_length_sampling: return "link_length_sampling";
    }
    return "unknown";
}

void SimConfig::validate() const {
    if (trials < 1) throw ValidationError("trials", "must be >= 1");
    if (hex_rings < 2) throw ValidationError("hex_rings", "must be >= 2 so measured cells have a full interferer ring");
    if (!(window_scale > 0.0)) throw ValidationError("window_scale", "must be > 0");
    require_threshold_grid(sinr_thresholds);
}

CcdfCurve empirical_ccdf(const std::vector<double>& samples, const std::vector<double>& thresholds) {
    require_threshold_grid(thresholds);
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    CcdfCurve curve{thresholds, {}, CurveKind::empirical};
    curve.values.reserve(thresholds.size());
    const double n = static_cast<double>(sorted.size());
    for (double x : thresholds) {
        const auto at_least = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), x));
        curve.values.push_back(sorted.empty() ? 0.0 : at_least / n);
    }
    return curve;
}

SimOutcome simulate_uplink_hex(const NetworkParams& params, const SimConfig& sim) {
    sim.validate();
    if (sim.scenario != Scenario::uplink_hex) throw ValidationError("scenario", "simulate_uplink_hex needs uplink_hex");
    const DerivedQuantities d = derive_unchecked(params);
    const HexLayout layout(params.lambda_b, sim.hex_rings);
    const std::size_t cells = layout.centers.size();
    const double mean_transmitters = d.lambda_c * static_cast<double>(cells) / params.lambda_b;
    const int last_measured_ring = sim.hex_rings - 2;
    const double alpha = params.alpha;

    const auto samples = run_trials(sim, [&](std::uint64_t trial, std::vector<double>& out) {
        rng::CounterRng placement(sim.seed, trial, kPlacement);
        rng::CounterRng fading(sim.seed, trial, kFading);

        // Reservoir sampling: each cell keeps a uniformly chosen transmitter.
        std::vector<std::uint64_t> count(cells, 0);
        std::vector<Point> scheduled(cells);
        const std::uint64_t n = placement.poisson(mean_transmitters);
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::size_t cell =
                std::min(cells - 1, static_cast<std::size_t>(placement.uniform() * static_cast<double>(cells)));
            const Point p = layout.sample_in_cell(cell, placement);
            ++count[cell];
            if (placement.uniform() * static_cast<double>(count[cell]) < 1.0) scheduled[cell] = p;
        }
        std::vector<double> tx_power(cells, 0.0);
        for (std::size_t c = 0; c < cells; ++c) {
            if (count[c] == 0) continue;
            const double link = std::hypot(scheduled[c].x - layout.centers[c].x, scheduled[c].y - layout.centers[c].y);
            tx_power[c] = std::pow(link, alpha);
        }

        for (std::size_t j = 0; j < cells; ++j) {
            if (layout.ring[j] > last_measured_ring || count[j] == 0) continue;
            const double signal = fading_gain(fading, sim.fading);
            double interference = 0.0;
            if (sim.include_interference) {
                for (std::size_t i = 0; i < cells; ++i) {
                    if (i == j || count[i] == 0) continue;
                    const double dist =
                        std::hypot(scheduled[i].x - layout.centers[j].x, scheduled[i].y - layout.centers[j].y);
                    interference += tx_power[i] * fading_gain(fading, sim.fading) * std::pow(dist, -alpha);
                }
            }
            out.push_back(signal / (interference + d.n0_equiv));
        }
    });

    SimOutcome outcome;
    outcome.empirical_ccdf = empirical_ccdf(samples, sim.sinr_thresholds);
    outcome.samples_collected = samples.size();
    outcome.trials = sim.trials;
    outcome.seed = sim.seed;
    return outcome;
}

SimOutcome simulate_d2d(const NetworkParams& params, const SimConfig& sim) {
    sim.validate();
    if (sim.scenario != Scenario::d2d_overlay && sim.scenario != Scenario::d2d_underlay)
        throw ValidationError("scenario", "simulate_d2d needs d2d_overlay or d2d_underlay");
    const bool underlay = sim.scenario == Scenario::d2d_underlay;
    if (underlay && !(params.beta > 0.0)) throw ValidationError("beta", "underlay simulation needs beta > 0");
    const DerivedQuantities d = derive_unchecked(params);
    if (!(d.p_d2d_mode > 0.0)) throw ValidationError("mu", "D2D simulation needs mu > 0");

    const double alpha = params.alpha;
    const double xi = params.xi;
    const double beta = underlay ? params.beta : 1.0;
    // Per-subchannel power D^alpha / (beta B) is rescaled by beta B in the SINR,
    // so D2D interferers enter with D^alpha and cellular ones with beta L^alpha.
    const double cellular_scale = beta;

    const double active_density = params.kappa * d.lambda_d;
    const double window_d2d = sim.window_scale * mean_nearest_distance(active_density > 0.0 ? active_density : d.lambda_d);
    const double mean_d2d_points = d.lambda_d * std::numbers::pi * window_d2d * window_d2d;
    const double window_cellular = sim.window_scale * mean_nearest_distance(params.lambda_b);
    const double mean_cellular_points = params.lambda_b * std::numbers::pi * window_cellular * window_cellular;

    const auto samples = run_trials(sim, [&](std::uint64_t trial, std::vector<double>& out) {
        rng::CounterRng link(sim.seed, trial, kPlacement);
        rng::CounterRng field(sim.seed, trial, kFading);
        rng::CounterRng thinning(sim.seed, trial, kThinning);
        rng::CounterRng cellular(sim.seed, trial, kCellularField);

        // Channel inversion normalizes the typical link's mean received power,
        // so its own length does not enter the SINR.
        const double signal = fading_gain(link, sim.fading);
        double interference = 0.0;
        if (sim.include_interference) {
            const std::uint64_t n = field.poisson(mean_d2d_points);
            for (std::uint64_t i = 0; i < n; ++i) {
                const double r = window_d2d * std::sqrt(field.uniform());
                const double length = truncated_rayleigh(xi, d.p_d2d_mode, field.uniform());
                const double gain = fading_gain(field, sim.fading);
                const bool aloha = field.uniform() < params.kappa;
                const bool hops_here = !underlay || thinning.uniform() < beta;
                if (aloha && hops_here) interference += std::pow(length, alpha) * gain * std::pow(r, -alpha);
            }
            if (underlay) {
                const double radius = d.cell_radius;
                const std::uint64_t m = cellular.poisson(mean_cellular_points);
                for (std::uint64_t i = 0; i < m; ++i) {
                    const double r = window_cellular * std::sqrt(cellular.uniform());
                    const double length = radius * std::sqrt(cellular.uniform());
                    const double gain = fading_gain(cellular, sim.fading);
                    interference += cellular_scale * std::pow(length, alpha) * gain * std::pow(r, -alpha);
                }
            }
        }
        out.push_back(signal / (interference + d.n0_equiv));
    });

    SimOutcome outcome;
    outcome.empirical_ccdf = empirical_ccdf(samples, sim.sinr_thresholds);
    outcome.samples_collected = samples.size();
    outcome.trials = sim.trials;
    outcome.seed = sim.seed;
    outcome.window_radius_d2d = window_d2d;
    outcome.window_radius_cellular = underlay ? window_cellular : 0.0;

    // First-order bound on the interference exponent lost outside the window:
    // 2 pi lambda E[P] W^(2 - alpha) / (alpha - 2) per unit threshold.
    const double tail = 2.0 * std::numbers::pi / (alpha - 2.0);
    double bias = 0.0;
    if (d.lambda_d > 0.0 && params.kappa > 0.0) {
        bias += tail * active_density * beta * power::avg_power_d2d_mode(params) * std::pow(window_d2d, 2.0 - alpha);
    }
    if (underlay) {
        bias += tail * params.lambda_b * cellular_scale * power::avg_power_cellular(params) *
                std::pow(window_cellular, 2.0 - alpha);
    }
    outcome.truncation_bias_per_threshold = bias;
    return outcome;
}

LinkPowerSample sample_link_powers(const NetworkParams& params, const SimConfig& sim) {
    sim.validate();
    if (sim.scenario != Scenario::link_length_sampling)
        throw ValidationError("scenario", "sample_link_powers needs link_length_sampling");
    validate(params);
    const double radius = std::sqrt(1.0 / (std::numbers::pi * params.lambda_b));
    const double xi_pi = params.xi * std::numbers::pi;
    const double alpha = params.alpha;
    const double mu = params.mu;

    constexpr std::uint64_t kDrawsPerChunk = 1 << 16;
    const std::uint64_t chunks = (sim.trials + kDrawsPerChunk - 1) / kDrawsPerChunk;
    struct Sums {
        double p_c = 0.0;
        double p_d = 0.0;
        double p_d_hat = 0.0;
        std::uint64_t d2d_mode = 0;
    };
    std::vector<Sums> partial(chunks);
    for_each_chunk(chunks, sim.threads, [&](std::uint64_t c) {
        Sums s;
        const std::uint64_t first = c * kDrawsPerChunk;
        const std::uint64_t last = std::min(sim.trials, first + kDrawsPerChunk);
        for (std::uint64_t i = first; i < last; ++i) {
            rng::CounterRng draw(sim.seed, i, kPlacement);
            const double cellular_length = radius * std::sqrt(draw.uniform());
            const double d2d_length = std::sqrt(-std::log(draw.uniform()) / xi_pi);
            const double p_c = std::pow(cellular_length, alpha);
            s.p_c += p_c;
            if (d2d_length < mu) {
                const double p_d = std::pow(d2d_length, alpha);
                s.p_d += p_d;
                s.p_d_hat += p_d;
                ++s.d2d_mode;
            } else {
                s.p_d += p_c;
            }
        }
        partial[c] = s;
    });

    Sums total;
    for (const auto& s : partial) {
        total.p_c += s.p_c;
        total.p_d += s.p_d;
        total.p_d_hat += s.p_d_hat;
        total.d2d_mode += s.d2d_mode;
    }
    LinkPowerSample result;
    const double n = static_cast<double>(sim.trials);
    result.draws = sim.trials;
    result.mean_p_c = total.p_c / n;
    result.mean_p_d = total.p_d / n;
    result.d2d_mode_draws = total.d2d_mode;
    if (total.d2d_mode > 0) result.mean_p_d_hat = total.p_d_hat / static_cast<double>(total.d2d_mode);
    return result;
}

}  // namespace d2d::montecarlo
