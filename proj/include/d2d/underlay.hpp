#pragma once

#include <span>
#include <vector>

#include "d2d/ccdf.hpp"
#include "d2d/model.hpp"
#include "d2d/rates.hpp"
#include "d2d/specfun.hpp"

namespace d2d::underlay {

// D2D transmitters hop onto beta * B of the B cellular subchannels and split
// their power across them. beta must lie in (0, 1] for the CCDFs and spectral
// efficiencies.

/// exp(-N0 x - c beta x^(2/a) - (beta x)^(2/a) / (2 sinc(2/a))).
CcdfCurve d2d_sinr_ccdf_underlay(const NetworkParams& params, std::span<const double> thresholds);

double d2d_spectral_efficiency_underlay(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// exp(-N0 x - c beta^(1 - 2/a) x^(2/a) - out-of-cell exponent).
CcdfCurve cellular_sinr_ccdf_underlay(const NetworkParams& params, std::span<const double> thresholds);

double cellular_spectral_efficiency_underlay(const NetworkParams& params,
                                             const specfun::QuadratureSpec& spec = {});

/// T_c = R_c, T_d_hat = beta R_d, T_d = e^(-xi pi mu^2) R_c + beta (1 - e^(...)) R_d.
/// beta = 0 is allowed here (pure cellular).
RateReport underlay_rates(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// Lower end of the beta search; utility is -inf at beta = 0.
inline constexpr double kMinAccessFactor = 1e-4;
inline constexpr int kAccessFactorGridPoints = 32;

/// Utility-maximizing beta on [kMinAccessFactor, 1]: best point of a 32-point
/// grid, refined by golden-section search between its neighbours.
double optimal_access_factor(const NetworkParams& params, const specfun::QuadratureSpec& spec = {});

/// Largest beta in [0, 1] meeting the D2D outage target
///   (N0 B theta + theta^(2/a) c) beta + theta^(2/a) / (2 sinc(2/a)) beta^(2/a) <= log(1 / (1 - eps)),
/// found by bisection.
double max_beta_for_d2d_outage(const NetworkParams& params, double theta_d, double eps_d);

/// Left side minus right side of the D2D outage constraint at beta.
double d2d_outage_residual(const NetworkParams& params, double theta_d, double eps_d, double beta);

struct CellularOutageBound {
    double beta_max = 0.0;
    bool feasible = false;  // false when the target fails even without D2D
    double budget = 0.0;    // log(1/(1-eps)) - N0 B theta - out-of-cell exponent
};

/// Largest beta meeting the cellular outage target
///   theta^(2/a) c beta^(1 - 2/a) <= budget,
/// in closed form, clamped to [0, 1].
CellularOutageBound max_beta_for_cellular_outage(const NetworkParams& params, double theta_c, double eps_c);

/// Same, reusing a precomputed out-of-cell exponent at theta_c.
CellularOutageBound max_beta_for_cellular_outage(const NetworkParams& params, double theta_c, double eps_c,
                                                 double out_of_cell_at_theta);

struct OutageTargets {
    double theta_d = 0.1;
    double eps_d = 0.1;
    double theta_c = 0.1;
    double eps_c = 0.1;
};

struct FeasibilityPoint {
    double mu = 0.0;
    double beta_max_d2d = 0.0;
    double beta_max_cellular = 0.0;
    double beta_max = 0.0;  // min of the two
    bool cellular_feasible = false;
};

/// beta_max(mu) for both outage constraints over a mu grid.
std::vector<FeasibilityPoint> feasibility_curve(const NetworkParams& params, std::span<const double> mu_grid,
                                                const OutageTargets& targets);

}  // namespace d2d::underlay
