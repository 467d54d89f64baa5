#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace d2d {

enum class CurveKind { analytical, empirical };

/// Tabulated SINR complementary CDF P(SINR >= x) on a threshold grid (linear).
struct CcdfCurve {
    std::vector<double> thresholds;
    std::vector<double> values;
    CurveKind kind = CurveKind::analytical;

    std::size_t size() const { return thresholds.size(); }

    /// Throws ValidationError unless thresholds are positive and strictly
    /// increasing, and values are nonincreasing probabilities of the same length.
    void validate() const;
};

/// `count` thresholds evenly spaced in dB over [lo_db, hi_db], returned linear.
std::vector<double> log_spaced_thresholds(double lo_db, double hi_db, std::size_t count);

/// 60 points over [-20, 40] dB.
std::vector<double> default_thresholds();

/// Largest |a - b| over a common grid.
double max_abs_deviation(const CcdfCurve& a, const CcdfCurve& b);

/// Checks the threshold grid precondition shared by every CCDF routine.
void require_threshold_grid(std::span<const double> thresholds);

}  // namespace d2d
