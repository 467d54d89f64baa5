#include "d2d/rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

double proportional_fair_utility(double w_c, double w_d, double t_c, double t_d) {
    if (!(t_c > 0.0) || !(t_d > 0.0)) {
        throw DegenerateUtilityError("proportional-fair utility is -inf: T_c = " + std::to_string(t_c) +
                                     ", T_d = " + std::to_string(t_d));
    }
    return w_c * std::log(t_c) + w_d * std::log(t_d);
}

double proportional_fair_utility_or_ninf(double w_c, double w_d, double t_c, double t_d) {
    if (!(t_c > 0.0) || !(t_d > 0.0)) return -std::numeric_limits<double>::infinity();
    return w_c * std::log(t_c) + w_d * std::log(t_d);
}

double ergodic_log_rate(double n0, const std::function<double(double)>& laplace,
                        const specfun::QuadratureSpec& spec) {
    if (!(n0 >= 0.0)) throw DomainError("ergodic_log_rate: noise must be >= 0");
    return specfun::integrate_semiinfinite(
        [&](double x) { return std::exp(-n0 * x) / (1.0 + x) * laplace(x); }, spec);
}

double scheduling_prefactor(double density_ratio) {
    if (!(density_ratio > 0.0)) throw DomainError("scheduling_prefactor: ratio must be > 0");
    return -std::expm1(-density_ratio) / density_ratio;
}

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tolerance) {
    constexpr double inv_phi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (c == d) break;
    }
    return 0.5 * (a + b);
}

}  // namespace d2d
