#pragma once

#include "d2d/model.hpp"

namespace d2d::power {

// Average transmit powers under channel inversion, in virtual units (m^alpha):
// the received power of every link is normalized to one.

/// E[P_c] for a cellular UE uniformly placed in the disk-approximated cell.
double avg_power_cellular(const NetworkParams& params);

/// E[P_d] for a potential D2D UE (either mode).
double avg_power_potential_d2d(const NetworkParams& params);

/// E[P_d | D < mu]. Throws DegenerateInputError at mu = 0.
double avg_power_d2d_mode(const NetworkParams& params);

/// Mode-selection threshold minimizing E[P_d]; equals E[P_c]^(1/alpha) and
/// does not depend on the D2D distance distribution.
double optimal_mode_threshold(const NetworkParams& params);

struct ActualPowerReport {
    double avg_cellular_dbm = 0.0;
    double avg_d2d_dbm = 0.0;
    double peak_cellular_dbm = 0.0;
    double peak_d2d_dbm = 0.0;
};

/// Maps virtual powers to dBm with the scale factor N0~ * B_w * SNR_m. Peak
/// powers are what a cell-edge (distance R) or threshold-distance (mu) link
/// needs to hit SNR_m. At mu = 0 the D2D entries are -inf.
ActualPowerReport actual_power_report(const NetworkParams& params);

}  // namespace d2d::power
