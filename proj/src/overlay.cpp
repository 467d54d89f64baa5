#include "d2d/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "d2d/errors.hpp"

namespace d2d::overlay {

namespace {

// Band of 2F1 arguments z handled by quadrature; outside it the integrand is
// expanded in powers of z (small z) or 1/z (large z) and integrated exactly.
constexpr double kSmallArgument = 0.5;
constexpr double kLargeArgument = 2.0;

const specfun::QuadratureSpec& kernel_band_spec() {
    static const specfun::QuadratureSpec spec{1e-12, 1e-15, 2000, 1e-16};
    return spec;
}

// int_{upper}^inf (1 - F(x u^-h)) du with z = x upper^-h <= 1/2, using
// 1 - F(z) = sum_{k>=1} (-1)^(k+1) b / (b + k) z^k.
double small_argument_tail(double h, double b, double upper, double z) {
    double sum = 0.0;
    double z_power = 1.0;
    for (int k = 1; k < 200; ++k) {
        z_power *= z;
        const double term = (k % 2 == 1 ? 1.0 : -1.0) * b / (b + k) * upper * z_power / (h * k - 1.0);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// int_1^{upper} (1 - F(x u^-h)) du with x upper^-h >= 2, using
// F(z) = z^-b / sinc(b) - b sum_{k>=0} (-1)^k z^-(k+1) / (k + 1 - b).
double large_argument_head(double h, double b, double x, double upper) {
    double sum = (upper - 1.0) - std::pow(x, -b) / specfun::sinc_normalized(b) * (upper * upper - 1.0) / 2.0;
    const double ratio_upper = std::pow(upper, h) / x;  // 1 / z at u = upper
    const double ratio_lower = 1.0 / x;                 // 1 / z at u = 1
    double pow_upper = 1.0;
    double pow_lower = 1.0;
    for (int k = 0; k < 400; ++k) {
        pow_upper *= ratio_upper;
        pow_lower *= ratio_lower;
        const double exponent = h * (k + 1) + 1.0;
        const double term = (k % 2 == 0 ? 1.0 : -1.0) * b * (upper * pow_upper - pow_lower) /
                            ((k + 1.0 - b) * exponent);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double d2d_rate(const NetworkParams& p, double c, double n0, const specfun::QuadratureSpec& spec) {
    if (p.kappa == 0.0) return 0.0;
    const double exponent = 2.0 / p.alpha;
    return p.kappa * ergodic_log_rate(n0, [c, exponent](double x) { return std::exp(-c * std::pow(x, exponent)); },
                                      spec);
}

// E[log(1 + SINR)] of the cellular link, before the scheduling share.
double cellular_log_rate(double alpha, double n0, const specfun::QuadratureSpec& spec) {
    return ergodic_log_rate(n0, [alpha](double x) { return std::exp(-out_of_cell_exponent(alpha, x)); }, spec);
}

double limiting_interference_constant(const NetworkParams& p) {
    return p.kappa * p.q * (p.lambda_ue / p.xi) / specfun::sinc_normalized(2.0 / p.alpha);
}

}  // namespace

double out_of_cell_exponent(double alpha, double x) {
    if (!(alpha > 2.0)) throw DomainError("out_of_cell_exponent: alpha must be > 2");
    if (!(x >= 0.0)) throw DomainError("out_of_cell_exponent: x must be >= 0");
    if (x == 0.0) return 0.0;
    const double h = alpha / 2.0;
    const double b = 2.0 / alpha;
    // z(u) = x u^-h decreases in u; split [1, inf) where z crosses 2 and 1/2.
    const double head_end = std::max(1.0, std::pow(x / kLargeArgument, b));
    const double tail_start = std::max(1.0, std::pow(x / kSmallArgument, b));

    double total = 0.0;
    if (head_end > 1.0) total += large_argument_head(h, b, x, head_end);
    if (tail_start > head_end) {
        total += specfun::integrate_finite(
                     [x, h, b](double u) { return specfun::hyp2f1_kernel_complement(b, x * std::pow(u, -h)); },
                     head_end, tail_start, kernel_band_spec())
                     .value;
    }
    total += small_argument_tail(h, b, tail_start, x * std::pow(tail_start, -h));
    return total;
}

CcdfCurve d2d_sinr_ccdf(const NetworkParams& params, std::span<const double> thresholds) {
    require_threshold_grid(thresholds);
    const DerivedQuantities d = derive_unchecked(params);
    CcdfCurve curve{{thresholds.begin(), thresholds.end()}, {}, CurveKind::analytical};
    curve.values.reserve(thresholds.size());
    for (double x : thresholds)
        curve.values.push_back(std::exp(-d.n0_equiv * x - d.c_mu * std::pow(x, 2.0 / params.alpha)));
    return curve;
}

double d2d_spectral_efficiency(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    const DerivedQuantities d = derive_unchecked(params);
    return d2d_rate(params, d.c_mu, d.n0_equiv, spec);
}

double d2d_spectral_efficiency_max(const NetworkParams& params) {
    const DerivedQuantities d = derive_unchecked(params);
    return params.kappa * std::exp(d.n0_equiv) * specfun::exp_integral_e1(d.n0_equiv);
}

double d2d_spectral_efficiency_min(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    const DerivedQuantities d = derive_unchecked(params);
    return d2d_rate(params, limiting_interference_constant(params), d.n0_equiv, spec);
}

CcdfCurve cellular_sinr_ccdf(const NetworkParams& params, std::span<const double> thresholds) {
    require_threshold_grid(thresholds);
    const DerivedQuantities d = derive_unchecked(params);
    CcdfCurve curve{{thresholds.begin(), thresholds.end()}, {}, CurveKind::analytical};
    curve.values.reserve(thresholds.size());
    for (double x : thresholds)
        curve.values.push_back(std::exp(-d.n0_equiv * x - out_of_cell_exponent(params.alpha, x)));
    return curve;
}

double cellular_spectral_efficiency(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    const DerivedQuantities d = derive(params);
    return scheduling_prefactor(d.lambda_c / params.lambda_b) * cellular_log_rate(params.alpha, d.n0_equiv, spec);
}

RateReport overlay_rates(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    const DerivedQuantities d = derive(params);
    const double eta = params.eta;
    const double n0_cellular = params.bandwidth_normalization ? d.n0_equiv * (1.0 - eta) : d.n0_equiv;
    const double n0_d2d = params.bandwidth_normalization ? d.n0_equiv * eta : d.n0_equiv;

    RateReport report;
    report.r_c = scheduling_prefactor(d.lambda_c / params.lambda_b) * cellular_log_rate(params.alpha, n0_cellular, spec);
    // Noise-free and interference-free D2D links have unbounded rate, but that
    // only happens at eta = 0 where the D2D band is empty.
    if (n0_d2d > 0.0 || d.c_mu > 0.0) report.r_d = d2d_rate(params, d.c_mu, n0_d2d, spec);
    report.t_c = (1.0 - eta) * report.r_c;
    report.t_d_hat = eta * report.r_d;
    report.t_d = (1.0 - d.p_d2d_mode) * report.t_c + d.p_d2d_mode * report.t_d_hat;
    report.utility = proportional_fair_utility(params.w_c, params.w_d, report.t_c, report.t_d);
    return report;
}

double partition_utility(const NetworkParams& params, double r_c, double r_d, double eta) {
    const double p_cell = std::exp(-mode_exponent(params));
    const double t_c = (1.0 - eta) * r_c;
    const double t_d = (1.0 - eta) * p_cell * r_c + eta * (1.0 - p_cell) * r_d;
    return proportional_fair_utility_or_ninf(params.w_c, params.w_d, t_c, t_d);
}

double optimal_partition(const NetworkParams& params, double r_c, double r_d) {
    validate(params);
    const double odds = std::expm1(mode_exponent(params));  // e^(xi pi mu^2) - 1
    const double w_sum = params.w_c + params.w_d;
    if (!(odds > 0.0) || !(r_d > 0.0)) return 0.0;
    const double ratio = r_c / (odds * r_d);
    if (!(r_d > w_sum / params.w_d * r_c / odds)) return 0.0;
    return 1.0 - params.w_c / w_sum / (1.0 - ratio);
}

double optimal_partition(const NetworkParams& params, const specfun::QuadratureSpec& spec) {
    return optimal_partition(params, cellular_spectral_efficiency(params, spec), d2d_spectral_efficiency(params, spec));
}

JointOptimum joint_optimize_mu_eta(const NetworkParams& params, std::span<const double> mu_grid,
                                   const specfun::QuadratureSpec& spec) {
    if (mu_grid.empty()) throw DomainError("joint_optimize_mu_eta: mu grid is empty");
    for (double mu : mu_grid)
        if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("joint_optimize_mu_eta: mu grid must be positive");

    // The cellular log rate does not depend on mu; only the scheduling share does.
    const double cellular_log = cellular_log_rate(params.alpha, derive(params).n0_equiv, spec);
    auto evaluate = [&](double mu) {
        NetworkParams p = params;
        p.mu = mu;
        const DerivedQuantities d = derive(p);
        const double r_c = scheduling_prefactor(d.lambda_c / p.lambda_b) * cellular_log;
        const double r_d = d2d_rate(p, d.c_mu, d.n0_equiv, spec);
        const double eta = optimal_partition(p, r_c, r_d);
        return JointOptimum{mu, eta, partition_utility(p, r_c, r_d, eta)};
    };

    std::size_t best_index = 0;
    JointOptimum best = evaluate(mu_grid[0]);
    for (std::size_t i = 1; i < mu_grid.size(); ++i) {
        const JointOptimum candidate = evaluate(mu_grid[i]);
        if (candidate.utility > best.utility || (candidate.utility == best.utility && candidate.mu < best.mu)) {
            best = candidate;
            best_index = i;
        }
    }
    if (mu_grid.size() == 1) return best;

    const double lo = mu_grid[best_index > 0 ? best_index - 1 : best_index];
    const double hi = mu_grid[best_index + 1 < mu_grid.size() ? best_index + 1 : best_index];
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    const double mu_refined =
        golden_section_maximize([&](double mu) { return evaluate(mu).utility; }, a, b, 1e-7 * (b - a));
    const JointOptimum refined = evaluate(mu_refined);
    return refined.utility > best.utility ? refined : best;
}

}  // namespace d2d::overlay
