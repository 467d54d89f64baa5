#pragma once

#include <numbers>

namespace d2d {

/// Base-station density of the reference deployment: one cell of radius 500 m.
inline constexpr double kReferenceBsDensity = 1.0 / (std::numbers::pi * 500.0 * 500.0);

/// Network, mode-selection and spectrum-sharing parameters. Densities are per
/// square metre, distances in metres. Default member values reproduce the
/// reference scenario (500 m cells, 20% potential D2D UEs, alpha = 3.5).
struct NetworkParams {
    double lambda_b = kReferenceBsDensity;
    double lambda_ue = 10.0 * kReferenceBsDensity;
    double xi = 10.0 * kReferenceBsDensity;  // Rayleigh D2D distance parameter
    double q = 0.2;                          // potential-D2D fraction
    double alpha = 3.5;                      // pathloss exponent
    double snr_m_db = 10.0;                  // operating regime SNR_m
    double mu = 200.0;                       // mode-selection threshold
    double kappa = 1.0;                      // Aloha access probability
    double eta = 0.2;                        // overlay spectrum partition
    double beta = 1.0;                       // underlay spectrum access factor
    int b_subchannels = 1;
    double w_c = 0.6;
    double w_d = 0.4;
    double noise_psd_dbm_hz = -174.0;
    double bandwidth_hz = 1e6;
    // Scale overlay link noise by the spectrum fraction each tier occupies.
    bool bandwidth_normalization = true;
};

/// Quantities every analytical formula shares.
struct DerivedQuantities {
    double lambda_c = 0.0;     // cellular transmitter density
    double lambda_d = 0.0;     // D2D-mode transmitter density
    double cell_radius = 0.0;  // radius of the disk with the area of one cell
    double p_d2d_mode = 0.0;   // P(D < mu)
    double c_mu = 0.0;         // D2D interference constant
    double n0_equiv = 0.0;     // equivalent noise power, 1 / SNR_m (linear)
};

/// Checks the field-level invariants (ranges, alpha > 2, weights summing to
/// one). Throws ValidationError naming the offending field.
void validate(const NetworkParams& params);

/// validate() plus the non-triviality requirement lambda_c >= lambda_b.
DerivedQuantities derive(const NetworkParams& params);

/// Like derive() but without the lambda_c >= lambda_b check. The simulators use
/// it for sparse-traffic configurations the analytics exclude.
DerivedQuantities derive_unchecked(const NetworkParams& params);

/// CDF of the Rayleigh D2D link length: 1 - exp(-xi pi x^2).
double d2d_distance_cdf(double xi, double x);

/// xi * pi * mu^2, the exponent in every mode-selection probability.
double mode_exponent(const NetworkParams& params);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace d2d
