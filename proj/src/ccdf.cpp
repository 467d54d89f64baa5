#include "d2d/ccdf.hpp"

#include <algorithm>
#include <cmath>

#include "d2d/errors.hpp"
#include "d2d/model.hpp"

namespace d2d {

void require_threshold_grid(std::span<const double> thresholds) {
    if (thresholds.empty()) throw ValidationError("thresholds", "grid is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0) || !std::isfinite(thresholds[i]))
            throw ValidationError("thresholds", "must be positive and finite");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw ValidationError("thresholds", "must be strictly increasing");
    }
}

void CcdfCurve::validate() const {
    require_threshold_grid(thresholds);
    if (values.size() != thresholds.size()) throw ValidationError("values", "length differs from thresholds");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw ValidationError("values", "must lie in [0, 1]");
        if (i > 0 && values[i] > values[i - 1]) throw ValidationError("values", "must be nonincreasing");
    }
}

std::vector<double> log_spaced_thresholds(double lo_db, double hi_db, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {db_to_linear(lo_db)};
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double db = lo_db + (hi_db - lo_db) * static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = db_to_linear(db);
    }
    return grid;
}

std::vector<double> default_thresholds() { return log_spaced_thresholds(-20.0, 40.0, 60); }

double max_abs_deviation(const CcdfCurve& a, const CcdfCurve& b) {
    if (a.size() != b.size()) throw ValidationError("values", "curves have different grids");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    return worst;
}

}  // namespace d2d
