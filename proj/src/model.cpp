#include "d2d/model.hpp"

#include <cmath>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/specfun.hpp"

namespace d2d {

namespace {

void require(bool ok, const char* field, const std::string& message) {
    if (!ok) throw ValidationError(field, message);
}

void require_probability(double value, const char* field) {
    require(value >= 0.0 && value <= 1.0, field, "must lie in [0, 1]");
}

}  // namespace

void validate(const NetworkParams& p) {
    require(std::isfinite(p.lambda_b) && p.lambda_b > 0.0, "lambda_b", "must be > 0");
    require(std::isfinite(p.lambda_ue) && p.lambda_ue > 0.0, "lambda_ue", "must be > 0");
    require(std::isfinite(p.xi) && p.xi > 0.0, "xi", "must be > 0");
    require_probability(p.q, "q");
    require(std::isfinite(p.alpha) && p.alpha > 2.0, "alpha", "must satisfy alpha > 2");
    require(std::isfinite(p.snr_m_db), "snr_m_db", "must be finite");
    require(std::isfinite(p.mu) && p.mu >= 0.0, "mu", "must be >= 0");
    require_probability(p.kappa, "kappa");
    require_probability(p.eta, "eta");
    require_probability(p.beta, "beta");
    require(p.b_subchannels >= 1, "b_subchannels", "must be a positive integer");
    require(p.w_c > 0.0, "w_c", "must be > 0");
    require(p.w_d > 0.0, "w_d", "must be > 0");
    require(std::abs(p.w_c + p.w_d - 1.0) <= 1e-12, "w_c", "w_c + w_d must equal 1");
    require(std::isfinite(p.noise_psd_dbm_hz), "noise_psd_dbm_hz", "must be finite");
    require(std::isfinite(p.bandwidth_hz) && p.bandwidth_hz > 0.0, "bandwidth_hz", "must be > 0");
}

double mode_exponent(const NetworkParams& params) {
    return params.xi * std::numbers::pi * params.mu * params.mu;
}

DerivedQuantities derive_unchecked(const NetworkParams& p) {
    validate(p);
    const double t = mode_exponent(p);
    DerivedQuantities d;
    d.p_d2d_mode = -std::expm1(-t);
    d.lambda_c = (1.0 - p.q) * p.lambda_ue + p.q * p.lambda_ue * std::exp(-t);
    d.lambda_d = p.q * p.lambda_ue * d.p_d2d_mode;
    d.cell_radius = std::sqrt(1.0 / (std::numbers::pi * p.lambda_b));
    // lambda/xi - (lambda/xi + lambda pi mu^2) e^-t == (lambda/xi) * gamma(2, t);
    // the incomplete-gamma form avoids cancellation at small mu.
    const double gamma2 = t > 0.0 ? specfun::lower_incomplete_gamma(2.0, t) : 0.0;
    d.c_mu = p.kappa * p.q * (p.lambda_ue / p.xi) * gamma2 / specfun::sinc_normalized(2.0 / p.alpha);
    d.n0_equiv = db_to_linear(-p.snr_m_db);
    return d;
}

DerivedQuantities derive(const NetworkParams& p) {
    DerivedQuantities d = derive_unchecked(p);
    if (d.lambda_c < p.lambda_b) {
        throw ValidationError("lambda_c", "derived cellular density " + std::to_string(d.lambda_c) +
                                              " is below lambda_b " + std::to_string(p.lambda_b));
    }
    return d;
}

double d2d_distance_cdf(double xi, double x) {
    if (!(xi > 0.0)) throw DomainError("d2d_distance_cdf: xi must be > 0");
    if (!(x >= 0.0)) throw DomainError("d2d_distance_cdf: x must be >= 0");
    return -std::expm1(-xi * std::numbers::pi * x * x);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace d2d
