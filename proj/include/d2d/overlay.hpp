#pragma once

#include <span>
#include <vector>

#include "d2d/ccdf.hpp"
#include "d2d/model.hpp"
#include "d2d/rates.hpp"
#include "d2d/specfun.hpp"

namespace d2d::overlay {

/// Out-of-cell uplink interference exponent
///   2 pi lambda_b int_R^inf (1 - 2F1(1, 2/a; 1 + 2/a; -x (R/r)^a)) r dr
/// (so the Laplace factor is exp(-value)). After u = (r/R)^2 it reads
/// int_1^inf (1 - 2F1(..; -x u^(-a/2))) du and no longer depends on lambda_b.
double out_of_cell_exponent(double alpha, double x);

/// D2D-link SINR CCDF, exp(-N0 x - c x^(2/alpha)).
CcdfCurve d2d_sinr_ccdf(const NetworkParams& params, std::span<const double> thresholds);

/// kappa * int e^(-N0 x) / (1 + x) e^(-c x^(2/alpha)) dx with the unscaled N0.
double d2d_spectral_efficiency(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// Interference-free limit (mu -> 0): kappa e^N0 E1(N0).
double d2d_spectral_efficiency_max(const NetworkParams& params);

/// All potential D2D UEs in D2D mode (mu -> inf): c -> kappa q lambda / (xi sinc(2/alpha)).
double d2d_spectral_efficiency_min(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// Cellular-link SINR CCDF, exp(-N0 x - out_of_cell_exponent(alpha, x)).
CcdfCurve cellular_sinr_ccdf(const NetworkParams& params, std::span<const double> thresholds);

/// Cellular spectral efficiency with the unscaled N0: Poisson scheduling
/// share times the ergodic log rate under out-of-cell interference.
double cellular_spectral_efficiency(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// T_c, T_d, T_d_hat and utility at params.eta. With bandwidth normalization on,
/// cellular links see noise N0 (1 - eta) and D2D links N0 eta. Throws
/// DegenerateUtilityError when T_c or T_d is zero.
RateReport overlay_rates(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// Utility at partition eta for fixed spectral efficiencies (r_c, r_d).
double partition_utility(const NetworkParams& params, double r_c, double r_d, double eta);

/// Closed-form proportional-fair partition for fixed (eta-independent) R_c and
/// R_d; zero when D2D is not worth any spectrum.
double optimal_partition(const NetworkParams& params, double r_c, double r_d);

/// Same, computing R_c and R_d from params with the unscaled noise.
double optimal_partition(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

struct JointOptimum {
    double mu = 0.0;
    double eta = 0.0;
    double utility = 0.0;
};

/// Maximizes utility(mu, optimal_partition(mu)) over the grid, then refines
/// between the neighbours of the best grid point by golden-section search.
/// Ties on the grid go to the smallest mu.
JointOptimum joint_optimize_mu_eta(const NetworkParams& params, std::span<const double> mu_grid,
                                   const specfun::QuadratureSpec& spec = {});

}  // namespace d2d::overlay
