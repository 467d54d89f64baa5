#include "d2d/power.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "d2d/errors.hpp"
#include "d2d/specfun.hpp"

namespace d2d::power {

namespace {

// (xi pi)^(-alpha/2) * gamma(alpha/2 + 1, xi pi mu^2) = E[D^alpha ; D < mu].
double truncated_d2d_moment(const NetworkParams& p) {
    const double t = mode_exponent(p);
    if (t == 0.0) return 0.0;
    return std::pow(p.xi * std::numbers::pi, -p.alpha / 2.0) *
           specfun::lower_incomplete_gamma(p.alpha / 2.0 + 1.0, t);
}

double dbm_from_virtual(double virtual_power, double scale_mw) {
    return linear_to_db(virtual_power * scale_mw);
}

}  // namespace

double avg_power_cellular(const NetworkParams& p) {
    validate(p);
    const double half = p.alpha / 2.0;
    return 1.0 / ((1.0 + half) * std::pow(std::numbers::pi * p.lambda_b, half));
}

double avg_power_potential_d2d(const NetworkParams& p) {
    validate(p);
    return std::exp(-mode_exponent(p)) * avg_power_cellular(p) + truncated_d2d_moment(p);
}

double avg_power_d2d_mode(const NetworkParams& p) {
    validate(p);
    const double t = mode_exponent(p);
    if (t == 0.0) throw DegenerateInputError("avg_power_d2d_mode: P(D < mu) = 0 at mu = 0");
    return truncated_d2d_moment(p) / -std::expm1(-t);
}

double optimal_mode_threshold(const NetworkParams& p) {
    return std::pow(avg_power_cellular(p), 1.0 / p.alpha);
}

ActualPowerReport actual_power_report(const NetworkParams& p) {
    validate(p);
    const double snr_db = p.snr_m_db;
    const double noise_dbm = p.noise_psd_dbm_hz + linear_to_db(p.bandwidth_hz);
    const double scale_mw = db_to_linear(noise_dbm + snr_db);
    const double radius = std::sqrt(1.0 / (std::numbers::pi * p.lambda_b));

    ActualPowerReport report;
    report.avg_cellular_dbm = dbm_from_virtual(avg_power_cellular(p), scale_mw);
    report.peak_cellular_dbm = snr_db + noise_dbm + 10.0 * p.alpha * std::log10(radius);
    if (p.mu > 0.0) {
        report.avg_d2d_dbm = dbm_from_virtual(avg_power_d2d_mode(p), scale_mw);
        report.peak_d2d_dbm = snr_db + noise_dbm + 10.0 * p.alpha * std::log10(p.mu);
    } else {
        report.avg_d2d_dbm = -std::numeric_limits<double>::infinity();
        report.peak_d2d_dbm = -std::numeric_limits<double>::infinity();
    }
    return report;
}

}  // namespace d2d::power
