#pragma once

#include <functional>

namespace d2d::specfun {

/// Tolerances for the adaptive quadrature used by every rate and CCDF integral.
struct QuadratureSpec {
    double relative_tolerance = 1e-8;
    double absolute_tolerance = 1e-12;
    int max_subdivisions = 2000;
    // Integrand magnitude (scaled by the abscissa) below which the semi-infinite
    // tail is dropped.
    double tail_cutoff_epsilon = 1e-14;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
};

using Integrand = std::function<double(double)>;

/// Lower incomplete gamma function gamma(s, x) = int_0^x z^(s-1) e^-z dz.
double lower_incomplete_gamma(double s, double x);

/// Exponential integral E1(x) = int_x^inf e^-t / t dt, for x > 0.
double exp_integral_e1(double x);

/// sin(pi x) / (pi x) on the open interval (0, 1).
double sinc_normalized(double x);

/// 2F1(1, b; 1 + b; -z) for 0 < b < 1 and z >= 0, evaluated from
/// b * int_0^1 t^(b-1) / (1 + z t) dt with t = u^(1/b), which leaves the
/// smooth integrand 1 / (1 + z u^(1/b)) on [0, 1].
double hyp2f1_kernel(double b, double z);

/// 1 - hyp2f1_kernel(b, z), computed without cancellation for small z.
double hyp2f1_kernel_complement(double b, double z);

/// Adaptive Gauss-Kronrod (7/15) integration over a finite interval.
QuadratureResult integrate_finite(const Integrand& f, double a, double b,
                                  const QuadratureSpec& spec = {});

/// Integral of f over (0, inf). The domain is covered by doubling panels
/// [0,1], [1,2], [2,4], ... until |f(b)| * b drops under the tail cutoff; the
/// remaining tail is bounded by that same quantity and folded into the error
/// estimate. Panels are then refined adaptively (largest error first).
/// Throws ConvergenceError when max_subdivisions is exhausted.
QuadratureResult integrate_semiinfinite_detailed(const Integrand& f,
                                                 const QuadratureSpec& spec = {});

double integrate_semiinfinite(const Integrand& f, const QuadratureSpec& spec = {});

}  // namespace d2d::specfun
