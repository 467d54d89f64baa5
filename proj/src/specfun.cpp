#include "d2d/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "d2d/errors.hpp"

namespace d2d::specfun {

namespace {

// Kronrod 15-point abscissae and weights; the 7-point Gauss rule uses the
// odd-indexed nodes.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod_15(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = f_center * kKronrodWeights[7];
    double gauss = f_center * kGaussWeights[3];
    double abs_sum = std::abs(kronrod);
    std::array<double, 7> f_left{};
    std::array<double, 7> f_right{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f_left[j] = f(center - dx);
        f_right[j] = f(center + dx);
        const double pair = f_left[j] + f_right[j];
        kronrod += kKronrodWeights[j] * pair;
        abs_sum += kKronrodWeights[j] * (std::abs(f_left[j]) + std::abs(f_right[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[7] * std::abs(f_center - mean);
    for (int j = 0; j < 7; ++j)
        asc += kKronrodWeights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));

    const double value = kronrod * half;
    asc *= std::abs(half);
    abs_sum *= std::abs(half);
    double error = std::abs((kronrod - gauss) * half);
    // QUADPACK error scaling: the raw |K - G| difference overestimates the
    // Kronrod error for smooth integrands.
    if (asc != 0.0 && error != 0.0) error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
    const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum;
    if (roundoff > std::numeric_limits<double>::min()) error = std::max(roundoff, error);
    if (!std::isfinite(value)) throw ConvergenceError("non-finite integrand value on [" +
                                                      std::to_string(a) + ", " + std::to_string(b) + "]");
    return {a, b, value, error};
}

// Global adaptive refinement: always bisect the panel with the largest error.
QuadratureResult refine(const Integrand& f, std::vector<Panel> panels, double extra_error,
                        const QuadratureSpec& spec) {
    std::priority_queue<Panel> queue(panels.begin(), panels.end());
    double total = 0.0;
    double total_error = extra_error;
    for (const auto& p : panels) {
        total += p.value;
        total_error += p.error;
    }
    int subdivisions = static_cast<int>(panels.size());
    while (total_error > std::max(spec.absolute_tolerance, spec.relative_tolerance * std::abs(total))) {
        if (subdivisions >= spec.max_subdivisions) {
            throw ConvergenceError("quadrature did not converge within " +
                                   std::to_string(spec.max_subdivisions) +
                                   " subdivisions (error estimate " + std::to_string(total_error) + ")");
        }
        const Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw ConvergenceError("quadrature panel collapsed to machine precision near " +
                                   std::to_string(worst.a));
        }
        const Panel left = gauss_kronrod_15(f, worst.a, mid);
        const Panel right = gauss_kronrod_15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }
    // Re-sum from the panel list so the result does not carry the running
    // update's cancellation error.
    double resummed = 0.0;
    double resummed_error = extra_error;
    while (!queue.empty()) {
        resummed += queue.top().value;
        resummed_error += queue.top().error;
        queue.pop();
    }
    return {resummed, resummed_error, subdivisions};
}

// Tighter than the default spec: the kernel sits inside two outer integrals.
const QuadratureSpec& kernel_spec() {
    static const QuadratureSpec spec{1e-13, 1e-16, 2000, 1e-16};
    return spec;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(relative_tolerance > 0.0)) throw DomainError("relative_tolerance must be > 0");
    if (!(absolute_tolerance > 0.0)) throw DomainError("absolute_tolerance must be > 0");
    if (!(tail_cutoff_epsilon > 0.0)) throw DomainError("tail_cutoff_epsilon must be > 0");
    if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
}

double lower_incomplete_gamma(double s, double x) {
    if (!(s > 0.0)) throw DomainError("lower_incomplete_gamma: s must be > 0");
    if (!(x >= 0.0)) throw DomainError("lower_incomplete_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double log_prefactor = s * std::log(x) - x;
    if (x < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        for (int n = 1; n < 10000; ++n) {
            term *= x / (s + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return sum * std::exp(log_prefactor);
    }
    // Upper incomplete gamma by modified Lentz continued fraction.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    const double upper = std::exp(log_prefactor) * h;
    return std::tgamma(s) - upper;
}

double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw DomainError("exp_integral_e1: x must be > 0");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= -x / k;
            const double contribution = term / k;
            sum += contribution;
            if (std::abs(contribution) < eps * std::abs(sum)) break;
        }
        return -std::numbers::egamma - std::log(x) - sum;
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return h * std::exp(-x);
}

double sinc_normalized(double x) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("sinc_normalized: x must lie in (0, 1)");
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

namespace {

void check_kernel_domain(double b, double z) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("hyp2f1_kernel: b must lie in (0, 1)");
    if (!(z >= 0.0)) throw DomainError("hyp2f1_kernel: z must be >= 0");
}

// Splits [0,1] at the knee u = z^(-b) where z u^(1/b) crosses 1.
double integrate_unit_interval(const Integrand& g, double b, double z) {
    const double knee = z > 1.0 ? std::pow(z, -b) : 1.0;
    if (knee >= 1.0) return integrate_finite(g, 0.0, 1.0, kernel_spec()).value;
    return integrate_finite(g, 0.0, knee, kernel_spec()).value +
           integrate_finite(g, knee, 1.0, kernel_spec()).value;
}

}  // namespace

double hyp2f1_kernel(double b, double z) {
    check_kernel_domain(b, z);
    if (z == 0.0) return 1.0;
    const double inv_b = 1.0 / b;
    return integrate_unit_interval(
        [z, inv_b](double u) { return 1.0 / (1.0 + z * std::pow(u, inv_b)); }, b, z);
}

double hyp2f1_kernel_complement(double b, double z) {
    check_kernel_domain(b, z);
    if (z == 0.0) return 0.0;
    const double inv_b = 1.0 / b;
    return integrate_unit_interval(
        [z, inv_b](double u) {
            const double w = z * std::pow(u, inv_b);
            return w / (1.0 + w);
        },
        b, z);
}

QuadratureResult integrate_finite(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (!(std::isfinite(a) && std::isfinite(b))) throw DomainError("integrate_finite: bounds must be finite");
    if (a == b) return {};
    if (a > b) {
        auto r = integrate_finite(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    return refine(f, {gauss_kronrod_15(f, a, b)}, 0.0, spec);
}

QuadratureResult integrate_semiinfinite_detailed(const Integrand& f, const QuadratureSpec& spec) {
    spec.validate();
    std::vector<Panel> panels;
    double running = 0.0;
    double a = 0.0;
    double b = 1.0;
    double tail_bound = 0.0;
    for (int k = 0;; ++k) {
        if (k > 1000 || static_cast<int>(panels.size()) >= spec.max_subdivisions) {
            throw ConvergenceError("integrate_semiinfinite: integrand tail did not decay");
        }
        const Panel p = gauss_kronrod_15(f, a, b);
        panels.push_back(p);
        running += p.value;
        tail_bound = std::abs(f(b)) * b;
        const double scale = std::max(1.0, std::abs(running));
        const bool tail_small = tail_bound <= spec.tail_cutoff_epsilon * scale;
        const bool panel_small =
            std::abs(p.value) <= std::max(spec.absolute_tolerance, spec.relative_tolerance * std::abs(running));
        if (tail_small && panel_small) break;
        a = b;
        b *= 2.0;
    }
    return refine(f, std::move(panels), tail_bound, spec);
}

double integrate_semiinfinite(const Integrand& f, const QuadratureSpec& spec) {
    return integrate_semiinfinite_detailed(f, spec).value;
}

}  // namespace d2d::specfun
