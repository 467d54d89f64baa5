#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "d2d/errors.hpp"
#include "d2d/overlay.hpp"
#include "d2d/rates.hpp"
#include "d2d/specfun.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace d2d;
using namespace d2d::overlay;

namespace {

// Out-of-cell interference exponent by direct quadrature of
//   int_1^inf (1 - 2F1(1, b; 1 + b; -x u^(-alpha/2))) du
// after v = 1/u, with the hypergeometric function from its Pfaff series.
double out_of_cell_oracle(double alpha, double x) {
    const double b = 2.0 / alpha;
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double v) {
        if (v < 1e-100) return 0.0;
        return oracle::hyp2f1_pfaff_complement(b, x * std::pow(v, alpha / 2.0)) / v / v;
    };
    return integrator.integrate(f, 0.0, 1.0, 1e-13);
}

// R_d from its defining integral using an independent quadrature.
double d2d_rate_oracle(double kappa, double n0, double c, double alpha) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double t) {
        // x = t / (1 - t) maps (0, 1) onto (0, inf).
        if (t >= 1.0) return 0.0;
        const double x = t / (1.0 - t);
        return std::exp(-n0 * x - c * std::pow(x, 2.0 / alpha)) / (1.0 + x) / ((1.0 - t) * (1.0 - t));
    };
    return kappa * integrator.integrate(f, 0.0, 1.0, 1e-12);
}

double prefactor_oracle(double r) { return (1.0 - std::exp(-r)) / r; }

NetworkParams large_mu(double q) {
    NetworkParams p;
    p.q = q;
    // xi pi mu^2 = 10 mu^2 / 500^2 >= 20
    p.mu = 800.0;
    return p;
}

}  // namespace

TEST_CASE("D2D SINR CCDF") {
    NetworkParams p;
    p.q = 0.0;
    const std::vector<double> one{1.0};
    CHECK(d2d_sinr_ccdf(p, one).values[0] == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));

    p = {};
    const double expected = std::exp(-0.1 - derive(p).c_mu);
    CHECK(d2d_sinr_ccdf(p, one).values[0] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.7596).epsilon(2e-4));

    const std::vector<double> tiny{1e-12};
    CHECK(d2d_sinr_ccdf(p, tiny).values[0] == doctest::Approx(1.0).epsilon(1e-6));

    const CcdfCurve curve = d2d_sinr_ccdf(p, default_thresholds());
    CHECK_NOTHROW(curve.validate());
    CHECK(curve.kind == CurveKind::analytical);
}

TEST_CASE("D2D spectral efficiency limits") {
    NetworkParams p;
    p.mu = 1e-3;
    const double r_max = std::exp(0.1) * specfun::exp_integral_e1(0.1);
    CHECK(r_max == doctest::Approx(2.0147).epsilon(1e-4));
    CHECK(d2d_spectral_efficiency_max(p) == doctest::Approx(r_max).epsilon(1e-14));
    CHECK(d2d_spectral_efficiency(p) == doctest::Approx(r_max).epsilon(1e-6));

    p.mu = 1e4;
    const double c_inf = p.kappa * p.q * p.lambda_ue / (p.xi * oracle::sinc(2.0 / p.alpha));
    const double r_min = d2d_rate_oracle(p.kappa, 0.1, c_inf, p.alpha);
    CHECK(d2d_spectral_efficiency_min(p) == doctest::Approx(r_min).epsilon(1e-8));
    CHECK(d2d_spectral_efficiency(p) == doctest::Approx(r_min).epsilon(1e-8));
}

TEST_CASE("D2D spectral efficiency against an independent quadrature") {
    for (double mu : {50.0, 200.0, 400.0}) {
        for (double kappa : {0.3, 1.0}) {
            NetworkParams p;
            p.mu = mu;
            p.kappa = kappa;
            const DerivedQuantities d = derive(p);
            CHECK(d2d_spectral_efficiency(p) ==
                  doctest::Approx(d2d_rate_oracle(kappa, d.n0_equiv, d.c_mu, p.alpha)).epsilon(1e-8));
        }
    }
}

TEST_CASE("D2D spectral efficiency is linear in kappa without interference") {
    NetworkParams p;
    p.q = 0.0;
    p.kappa = 1.0;
    const double full = d2d_spectral_efficiency(p);
    p.kappa = 0.5;
    CHECK(d2d_spectral_efficiency(p) == doctest::Approx(0.5 * full).epsilon(1e-14));
}

TEST_CASE("D2D spectral efficiency is nonincreasing in mu and bounded") {
    NetworkParams p;
    const double r_max = d2d_spectral_efficiency_max(p);
    const double r_min = d2d_spectral_efficiency_min(p);
    const double tol = 1e-8 * r_max;
    double previous = r_max;
    for (int i = 1; i <= 50; ++i) {
        p.mu = 20.0 * i;
        const double r = d2d_spectral_efficiency(p);
        CHECK(r <= previous + tol);
        CHECK(r >= r_min - tol);
        CHECK(r <= r_max + tol);
        previous = r;
    }
}

TEST_CASE("out-of-cell exponent against direct quadrature") {
    for (double alpha : {2.5, 3.0, 3.5, 4.0, 5.0}) {
        for (double x : {1e-3, 0.05, 0.1, 0.5, 1.0, 2.0, 3.0, 10.0, 100.0}) {
            CHECK(out_of_cell_exponent(alpha, x) == doctest::Approx(out_of_cell_oracle(alpha, x)).epsilon(1e-8));
        }
    }
}

TEST_CASE("out-of-cell exponent small and large threshold behaviour") {
    for (double alpha : {2.5, 3.5, 4.5}) {
        const double b = 2.0 / alpha;
        const double small = 1e-5;
        CHECK(out_of_cell_exponent(alpha, small) / (4.0 * small / (alpha * alpha - 4.0)) ==
              doctest::Approx(1.0).epsilon(1e-3));
        // The whole-plane exponent is x^b / (2 sinc b); the in-cell part is
        // bounded by 1, so the ratio tends to one as x grows.
        const double large = 1e8;
        const double dense = std::pow(large, b) / (2.0 * oracle::sinc(b));
        CHECK(std::abs(out_of_cell_exponent(alpha, large) - dense) <= 1.0);
        CHECK(out_of_cell_exponent(alpha, 0.0) == 0.0);
    }
    double previous = 0.0;
    for (double x = 1e-4; x < 1e4; x *= 1.5) {
        const double v = out_of_cell_exponent(3.5, x);
        CHECK(v > previous);
        previous = v;
    }
}

TEST_CASE("cellular SINR CCDF") {
    const NetworkParams p;
    const std::vector<double> tiny{1e-12};
    CHECK(cellular_sinr_ccdf(p, tiny).values[0] == doctest::Approx(1.0).epsilon(1e-6));

    const auto grid = default_thresholds();
    const CcdfCurve curve = cellular_sinr_ccdf(p, grid);
    CHECK_NOTHROW(curve.validate());
    for (std::size_t i = 0; i < grid.size(); i += 7) {
        const double expected = std::exp(-0.1 * grid[i] - out_of_cell_oracle(p.alpha, grid[i]));
        CHECK(curve.values[i] == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("cellular SINR CCDF does not depend on the BS density") {
    // Scaling every density together with lambda_b keeps the mode split; the
    // out-of-cell exponent is a function of the threshold and alpha alone.
    const NetworkParams p;
    const auto grid = default_thresholds();
    const CcdfCurve base = cellular_sinr_ccdf(p, grid);
    for (double scale : {1e-4, 1e4}) {
        NetworkParams q = p;
        q.lambda_b *= scale;
        q.lambda_ue *= scale;
        q.xi *= scale;
        CHECK(max_abs_deviation(cellular_sinr_ccdf(q, grid), base) == 0.0);
    }
}

TEST_CASE("scheduling prefactor") {
    CHECK(std::abs(scheduling_prefactor(1e3) - 1e-3) < 1e-6);
    CHECK(scheduling_prefactor(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
    CHECK(scheduling_prefactor(1.0) == doctest::Approx(0.6321).epsilon(1e-4));
    for (double r : {1e-8, 0.3, 2.0, 17.0}) CHECK(scheduling_prefactor(r) == doctest::Approx(prefactor_oracle(r)));

    NetworkParams p;
    double previous = 0.0;
    for (double mu = 0.0; mu <= 1000.0; mu += 25.0) {
        p.mu = mu;
        const DerivedQuantities d = derive(p);
        const double factor = scheduling_prefactor(d.lambda_c / p.lambda_b);
        CHECK(factor >= previous);
        previous = factor;
    }
}

TEST_CASE("cellular spectral efficiency") {
    NetworkParams p;
    const DerivedQuantities d = derive(p);
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double x = t / (1.0 - t);
        return std::exp(-0.1 * x - overlay::out_of_cell_exponent(p.alpha, x)) / (1.0 + x) / ((1.0 - t) * (1.0 - t));
    };
    const double expected = prefactor_oracle(d.lambda_c / p.lambda_b) * integrator.integrate(f, 0.0, 1.0, 1e-11);
    CHECK(cellular_spectral_efficiency(p) == doctest::Approx(expected).epsilon(1e-8));

    p.lambda_ue = 0.5 * p.lambda_b;
    CHECK_THROWS_AS(cellular_spectral_efficiency(p), ValidationError);
}

TEST_CASE("overlay rates identities") {
    NetworkParams p;
    p.eta = 0.0;
    RateReport r = overlay_rates(p);
    const double p_cell = std::exp(-mode_exponent(p));
    CHECK(r.t_d == doctest::Approx(p_cell * r.r_c).epsilon(1e-14));
    CHECK(r.t_d_hat == 0.0);

    p = {};
    p.mu = 0.0;
    r = overlay_rates(p);
    CHECK(r.t_d == doctest::Approx(r.t_c).epsilon(1e-14));
    CHECK(r.t_c == doctest::Approx((1.0 - p.eta) * r.r_c).epsilon(1e-14));

    p = {};
    r = overlay_rates(p);
    CHECK(r.t_d_hat > r.t_c);
    const double pd = derive(p).p_d2d_mode;
    CHECK(std::abs(r.t_d - ((1.0 - pd) * r.t_c + pd * r.t_d_hat)) < 1e-12);
    CHECK(r.utility == doctest::Approx(p.w_c * std::log(r.t_c) + p.w_d * std::log(r.t_d)));
    CHECK(r.r_c >= 0.0);
    CHECK(r.r_d >= 0.0);

    p.eta = 1.0;
    CHECK_THROWS_AS(overlay_rates(p), DegenerateUtilityError);
}

TEST_CASE("bandwidth normalization scales the link noise") {
    NetworkParams p;
    p.bandwidth_normalization = false;
    const RateReport raw = overlay_rates(p);
    CHECK(raw.r_d == doctest::Approx(d2d_spectral_efficiency(p)).epsilon(1e-12));
    CHECK(raw.r_c == doctest::Approx(cellular_spectral_efficiency(p)).epsilon(1e-12));

    p.bandwidth_normalization = true;
    const RateReport scaled = overlay_rates(p);
    NetworkParams d2d_equiv = p;
    d2d_equiv.snr_m_db = p.snr_m_db - 10.0 * std::log10(p.eta);
    CHECK(scaled.r_d == doctest::Approx(d2d_spectral_efficiency(d2d_equiv)).epsilon(1e-10));
    CHECK(scaled.r_d > raw.r_d);
    CHECK(scaled.r_c > raw.r_c);
}

TEST_CASE("optimal partition at large mu equals w_d") {
    for (double q : {0.1, 0.2, 0.4}) {
        const NetworkParams p = large_mu(q);
        CHECK(mode_exponent(p) >= 20.0);
        CHECK(std::abs(optimal_partition(p) - 0.4) < 1e-6);
    }
}

TEST_CASE("optimal partition boundary case") {
    NetworkParams p;
    CHECK(optimal_partition(p, 1.0, 1e-6) == 0.0);
    const double odds = std::expm1(mode_exponent(p));
    const double threshold = (p.w_c + p.w_d) / p.w_d / odds;
    CHECK(optimal_partition(p, 1.0, threshold) == 0.0);
    CHECK(optimal_partition(p, 1.0, threshold * (1.0 + 1e-9)) >= 0.0);
}

TEST_CASE("optimal partition matches numeric maximization") {
    auto numeric_eta = [](const NetworkParams& p, double r_c, double r_d) {
        const double p_cell = std::exp(-p.xi * std::numbers::pi * p.mu * p.mu);
        auto neg_utility = [&](double eta) {
            const double t_c = (1.0 - eta) * r_c;
            const double t_d = (1.0 - eta) * p_cell * r_c + eta * (1.0 - p_cell) * r_d;
            return -(p.w_c * std::log(t_c) + p.w_d * std::log(t_d));
        };
        return oracle::golden_min(neg_utility, 0.0, 1.0 - 1e-12, 1e-10);
    };

    const NetworkParams table;
    const double r_c = cellular_spectral_efficiency(table);
    const double r_d = d2d_spectral_efficiency(table);
    CHECK(std::abs(optimal_partition(table) - numeric_eta(table, r_c, r_d)) < 1e-4);

    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkParams p;
        p.q = 0.05 + 0.9 * u(gen);
        p.mu = 20.0 + 600.0 * u(gen);
        p.w_d = 0.1 + 0.8 * u(gen);
        p.w_c = 1.0 - p.w_d;
        p.kappa = 0.2 + 0.8 * u(gen);
        p.snr_m_db = -5.0 + 25.0 * u(gen);
        const double rc = cellular_spectral_efficiency(p);
        const double rd = d2d_spectral_efficiency(p);
        const double closed = optimal_partition(p, rc, rd);
        const double numeric = numeric_eta(p, rc, rd);
        CHECK(std::abs(closed - numeric) < 1e-4);
    }
}

TEST_CASE("joint mu and eta optimization") {
    const NetworkParams p;
    const std::vector<double> single{300.0};
    const JointOptimum one = joint_optimize_mu_eta(p, single);
    CHECK(one.mu == 300.0);
    NetworkParams at300 = p;
    at300.mu = 300.0;
    CHECK(one.eta == doctest::Approx(optimal_partition(at300)).epsilon(1e-12));

    std::vector<double> grid;
    for (double mu = 50.0; mu <= 1000.0; mu += 50.0) grid.push_back(mu);
    const JointOptimum best = joint_optimize_mu_eta(p, grid);
    for (double mu : grid) {
        NetworkParams q = p;
        q.mu = mu;
        const double rc = cellular_spectral_efficiency(q);
        const double rd = d2d_spectral_efficiency(q);
        CHECK(best.utility >= partition_utility(q, rc, rd, optimal_partition(q, rc, rd)) - 1e-12);
    }

    NetworkParams q = p;
    q.mu = best.mu;
    const double rc = cellular_spectral_efficiency(q);
    const double rd = d2d_spectral_efficiency(q);
    CHECK(best.utility == doctest::Approx(partition_utility(q, rc, rd, best.eta)).epsilon(1e-10));
    CHECK(best.utility > partition_utility(q, rc, rd, best.eta + 0.05));
    CHECK(best.utility > partition_utility(q, rc, rd, best.eta - 0.05));

    CHECK_THROWS_AS(joint_optimize_mu_eta(p, std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(joint_optimize_mu_eta(p, std::vector<double>{-1.0}), DomainError);
}
