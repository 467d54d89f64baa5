#pragma once

// Reference computations used only by the tests. None of them call into the
// library under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>

namespace oracle {

// Composite trapezoid rule with a fixed step.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, double step) {
    const auto n = static_cast<std::int64_t>(std::ceil((b - a) / step));
    const double h = (b - a) / static_cast<double>(n);
    double sum = 0.5 * (f(a) + f(b));
    for (std::int64_t i = 1; i < n; ++i) sum += f(a + h * static_cast<double>(i));
    return sum * h;
}

// Composite Simpson rule on n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::int64_t n) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double sum = f(a) + f(b);
    for (std::int64_t i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return sum * h / 3.0;
}

// 2F1(1, b; 1 + b; -z) through the Pfaff transformation
//   2F1(1, b; 1 + b; -z) = (1 + z)^-1 2F1(1, 1; 1 + b; w),  w = z / (1 + z),
// summed as a power series in w. Converges for every z >= 0 but slowly as
// w -> 1, so the term count is generous.
inline double hyp2f1_pfaff(double b, double z) {
    const double w = z / (1.0 + z);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < 5'000'000; ++n) {
        term *= (1.0 + n) * w / (1.0 + b + n);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum / (1.0 + z);
}

// 1 - 2F1(1, b; 1 + b; -z) from the same series: (z - sum_{n>=1} t_n) / (1 + z),
// which avoids subtracting two numbers close to one at small z.
inline double hyp2f1_pfaff_complement(double b, double z) {
    const double w = z / (1.0 + z);
    double term = 1.0;
    double tail = 0.0;
    for (int n = 0; n < 5'000'000; ++n) {
        term *= (1.0 + n) * w / (1.0 + b + n);
        tail += term;
        if (term <= 1e-18 * tail) break;
    }
    return (z - tail) / (1.0 + z);
}

inline double sinc(double x) { return std::sin(std::numbers::pi * x) / (std::numbers::pi * x); }

// Golden-section minimizer with its own implementation.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {  // ties move left: the plateau lies on the increasing side
            b = d; d = c; fd = fc; c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd; d = a + r * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace oracle
