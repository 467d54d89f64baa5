#pragma once

#include <functional>

#include "d2d/specfun.hpp"

namespace d2d {

/// Spectral efficiencies (R), UE rates (T) and the proportional-fair utility
/// for one parameter point. All rates in bit/s/Hz (natural-log units).
struct RateReport {
    double r_c = 0.0;      // cellular link spectral efficiency
    double r_d = 0.0;      // D2D link spectral efficiency
    double t_c = 0.0;      // cellular UE rate
    double t_d = 0.0;      // potential-D2D UE rate
    double t_d_hat = 0.0;  // rate of potential D2D UEs in D2D mode
    double utility = 0.0;
};

/// w_c log t_c + w_d log t_d. Throws DegenerateUtilityError when either rate
/// is not strictly positive.
double proportional_fair_utility(double w_c, double w_d, double t_c, double t_d);

/// Same objective, returning -inf instead of throwing. Used inside optimizers.
double proportional_fair_utility_or_ninf(double w_c, double w_d, double t_c, double t_d);

/// int_0^inf e^(-n0 x) / (1 + x) * laplace(x) dx: E[log(1 + SINR)] for unit-mean
/// exponential signal power and interference Laplace transform `laplace`.
double ergodic_log_rate(double n0, const std::function<double(double)>& laplace,
                        const specfun::QuadratureSpec& spec = {});

/// Poisson scheduling share E[1/N] = (1 - e^-ratio) / ratio, ratio = lambda_c / lambda_b.
double scheduling_prefactor(double density_ratio);

/// Golden-section maximization of a unimodal function on [lo, hi].
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance = 1e-10);

}  // namespace d2d
