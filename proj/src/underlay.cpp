#include "d2d/underlay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "d2d/errors.hpp"
#include "d2d/overlay.hpp"

namespace d2d::underlay {

namespace {

void require_access_factor(const NetworkParams& p) {
    if (!(p.beta > 0.0 && p.beta <= 1.0)) throw DomainError("underlay: beta must lie in (0, 1]");
}

void require_outage_target(double theta, double eps) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("outage target: theta must be > 0");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("outage target: eps must lie in (0, 1)");
}

double dense_cellular_coefficient(double alpha) {
    return 1.0 / (2.0 * specfun::sinc_normalized(2.0 / alpha));
}

// Out-of-cell exponents memoized by argument. Adaptive quadrature revisits the
// same abscissae across beta values, and the exponent does not depend on beta.
class OutOfCellCache {
public:
    explicit OutOfCellCache(double alpha) : alpha_(alpha) {}

    double operator()(double x) {
        auto [it, inserted] = values_.try_emplace(x, 0.0);
        if (inserted) it->second = overlay::out_of_cell_exponent(alpha_, x);
        return it->second;
    }

private:
    double alpha_;
    std::unordered_map<double, double> values_;
};

double d2d_rate(const NetworkParams& p, const DerivedQuantities& d, const specfun::QuadratureSpec& spec) {
    if (p.kappa == 0.0) return 0.0;
    const double b = 2.0 / p.alpha;
    const double d2d_coeff = d.c_mu * p.beta;
    const double cellular_coeff = dense_cellular_coefficient(p.alpha) * std::pow(p.beta, b);
    return p.kappa * ergodic_log_rate(
                         d.n0_equiv,
                         [&](double x) { return std::exp(-(d2d_coeff + cellular_coeff) * std::pow(x, b)); }, spec);
}

double cellular_rate(const NetworkParams& p, const DerivedQuantities& d, OutOfCellCache& out_of_cell,
                     const specfun::QuadratureSpec& spec) {
    const double b = 2.0 / p.alpha;
    const double d2d_coeff = d.c_mu * std::pow(p.beta, 1.0 - b);
    const double log_rate = ergodic_log_rate(
        d.n0_equiv, [&](double x) { return std::exp(-d2d_coeff * std::pow(x, b) - out_of_cell(x)); }, spec);
    return scheduling_prefactor(d.lambda_c / p.lambda_b) * log_rate;
}

RateReport rates_with_cache(const NetworkParams& p, OutOfCellCache& out_of_cell, const specfun::QuadratureSpec& spec) {
    const DerivedQuantities d = derive(p);
    RateReport report;
    report.r_c = cellular_rate(p, d, out_of_cell, spec);
    if (p.beta > 0.0) report.r_d = d2d_rate(p, d, spec);
    report.t_c = report.r_c;
    report.t_d_hat = p.beta * report.r_d;
    report.t_d = (1.0 - d.p_d2d_mode) * report.r_c + d.p_d2d_mode * report.t_d_hat;
    report.utility = proportional_fair_utility_or_ninf(p.w_c, p.w_d, report.t_c, report.t_d);
    return report;
}

}  // namespace

CcdfCurve d2d_sinr_ccdf_underlay(const NetworkParams& params, std::span<const double> thresholds) {
    require_threshold_grid(thresholds);
    require_access_factor(params);
    const DerivedQuantities d = derive_unchecked(params);
    const double b = 2.0 / params.alpha;
    const double cellular_coeff = dense_cellular_coefficient(params.alpha);
    CcdfCurve curve{{thresholds.begin(), thresholds.end()}, {}, CurveKind::analytical};
    curve.values.reserve(thresholds.size());
    for (double x : thresholds) {
        curve.values.push_back(std::exp(-d.n0_equiv * x - d.c_mu * params.beta * std::pow(x, b) -
                                        cellular_coeff * std::pow(params.beta * x, b)));
    }
    return curve;
}

double d2d_spectral_efficiency_underlay(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    require_access_factor(params);
    return d2d_rate(params, derive_unchecked(params), spec);
}

CcdfCurve cellular_sinr_ccdf_underlay(const NetworkParams& params, std::span<const double> thresholds) {
    require_threshold_grid(thresholds);
    require_access_factor(params);
    const DerivedQuantities d = derive_unchecked(params);
    const double b = 2.0 / params.alpha;
    const double d2d_coeff = d.c_mu * std::pow(params.beta, 1.0 - b);
    CcdfCurve curve{{thresholds.begin(), thresholds.end()}, {}, CurveKind::analytical};
    curve.values.reserve(thresholds.size());
    for (double x : thresholds) {
        curve.values.push_back(std::exp(-d.n0_equiv * x - d2d_coeff * std::pow(x, b) -
                                        overlay::out_of_cell_exponent(params.alpha, x)));
    }
    return curve;
}

double cellular_spectral_efficiency_underlay(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    require_access_factor(params);
    OutOfCellCache cache(params.alpha);
    return cellular_rate(params, derive(params), cache, spec);
}

RateReport underlay_rates(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    OutOfCellCache cache(params.alpha);
    RateReport report = rates_with_cache(params, cache, spec);
    report.utility = proportional_fair_utility(params.w_c, params.w_d, report.t_c, report.t_d);
    return report;
}

double optimal_access_factor(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    validate(params);
    OutOfCellCache cache(params.alpha);
    auto utility_at = [&](double beta) {
        NetworkParams p = params;
        p.beta = beta;
        return rates_with_cache(p, cache, spec).utility;
    };

    std::vector<double> grid(kAccessFactorGridPoints);
    for (int i = 0; i < kAccessFactorGridPoints; ++i)
        grid[i] = kMinAccessFactor + (1.0 - kMinAccessFactor) * i / (kAccessFactorGridPoints - 1);

    std::size_t best_index = 0;
    double best_utility = utility_at(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double u = utility_at(grid[i]);
        if (u > best_utility) {
            best_utility = u;
            best_index = i;
        }
    }
    const double lo = grid[best_index > 0 ? best_index - 1 : 0];
    const double hi = grid[std::min(best_index + 1, grid.size() - 1)];
    const double refined = golden_section_maximize(utility_at, lo, hi, 1e-7);
    const double refined_utility = utility_at(refined);
    return refined_utility > best_utility ? refined : grid[best_index];
}

double d2d_outage_residual(const NetworkParams& params, double theta_d, double eps_d, double beta) {
    const DerivedQuantities d = derive_unchecked(params);
    const double b = 2.0 / params.alpha;
    const double theta_b = std::pow(theta_d, b);
    const double lhs = (d.n0_equiv * params.b_subchannels * theta_d + theta_b * d.c_mu) * beta +
                       theta_b * dense_cellular_coefficient(params.alpha) * std::pow(beta, b);
    return lhs - std::log(1.0 / (1.0 - eps_d));
}

double max_beta_for_d2d_outage(const NetworkParams& params, double theta_d, double eps_d) {
    require_outage_target(theta_d, eps_d);
    auto residual = [&](double beta) { return d2d_outage_residual(params, theta_d, eps_d, beta); };
    if (residual(1.0) <= 0.0) return 1.0;
    if (residual(0.0) > 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

CellularOutageBound max_beta_for_cellular_outage(const NetworkParams& params, double theta_c, double eps_c) {
    require_outage_target(theta_c, eps_c);
    return max_beta_for_cellular_outage(params, theta_c, eps_c, overlay::out_of_cell_exponent(params.alpha, theta_c));
}

CellularOutageBound max_beta_for_cellular_outage(const NetworkParams& params, double theta_c, double eps_c,
                                                 double out_of_cell_at_theta) {
    require_outage_target(theta_c, eps_c);
    const DerivedQuantities d = derive_unchecked(params);
    CellularOutageBound bound;
    bound.budget = std::log(1.0 / (1.0 - eps_c)) - d.n0_equiv * params.b_subchannels * theta_c - out_of_cell_at_theta;
    if (bound.budget <= 0.0) return bound;
    bound.feasible = true;
    const double load = std::pow(theta_c, 2.0 / params.alpha) * d.c_mu;
    if (load <= 0.0) {
        bound.beta_max = 1.0;
        return bound;
    }
    const double beta = std::pow(bound.budget / load, params.alpha / (params.alpha - 2.0));
    bound.beta_max = std::clamp(beta, 0.0, 1.0);
    return bound;
}

std::vector<FeasibilityPoint> feasibility_curve(const NetworkParams& params, std::span<const double> mu_grid,
                                                const OutageTargets& targets) {
    validate(params);
    require_outage_target(targets.theta_d, targets.eps_d);
    require_outage_target(targets.theta_c, targets.eps_c);
    const double out_of_cell = overlay::out_of_cell_exponent(params.alpha, targets.theta_c);
    std::vector<FeasibilityPoint> curve;
    curve.reserve(mu_grid.size());
    for (double mu : mu_grid) {
        NetworkParams p = params;
        p.mu = mu;
        FeasibilityPoint point;
        point.mu = mu;
        point.beta_max_d2d = max_beta_for_d2d_outage(p, targets.theta_d, targets.eps_d);
        const CellularOutageBound cellular =
            max_beta_for_cellular_outage(p, targets.theta_c, targets.eps_c, out_of_cell);
        point.beta_max_cellular = cellular.beta_max;
        point.cellular_feasible = cellular.feasible;
        point.beta_max = std::min(point.beta_max_d2d, point.beta_max_cellular);
        curve.push_back(point);
    }
    return curve;
}

}  // namespace d2d::underlay
