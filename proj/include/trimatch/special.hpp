#pragma once

#include <cmath>
#include <limits>

#include "trimatch/errors.hpp"
#include "trimatch/quadrature.hpp"

namespace trimatch {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kEulerGamma = 0.57721566490153286061;

// Standard normal CDF via the complementary error function.
inline double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite x");
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

inline double std_normal_pdf(double x) {
    return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

// log Gamma(x) for x > 0.
inline double ln_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_gamma: requires x > 0");
    return std::lgamma(x);
}

namespace detail {

// log(cosh(u)) without overflow.
inline double lcosh(double u) {
    u = std::abs(u);
    return u + std::log1p(std::exp(-2.0 * u)) - kLn2;
}

// Large-x asymptotic series K_nu(x) ~ sqrt(pi/(2x)) e^-x sum_k a_k.
// Semiconvergent: accept only if terms certify a 1e-12 relative tail,
// otherwise report failure so the caller falls back to quadrature.
inline bool bessel_k_asymptotic(double nu, double x, double& ln_out) {
    const double four_nu2 = 4.0 * nu * nu;
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k <= 64; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (four_nu2 - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term)) return false;  // series started diverging
        term = next;
        sum += term;
        if (std::abs(term) <= 1e-12 * std::abs(sum)) {
            ln_out = 0.5 * std::log(kPi / (2.0 * x)) - x + std::log(sum);
            return true;
        }
    }
    return false;
}

// Integral representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt,
// evaluated in scaled log space so large-nu/small-x cases do not overflow.
inline double bessel_k_quad_ln(double nu, double x) {
    auto exponent = [&](double t) { return -x * std::cosh(t) + lcosh(nu * t); };
    const double tstar = nu > 0.0 ? std::asinh(nu / x) : 0.0;
    const double peak = exponent(tstar);
    double upper = tstar + 1.0;
    while (exponent(upper) > peak - 60.0) upper += 1.0;

    auto g = [&](double t) { return std::exp(exponent(t) - peak); };
    double value = integrate_adaptive(g, 0.0, tstar, 1e-12, 0.0).value +
                   integrate_adaptive(g, tstar, upper, 1e-12, 0.0).value;
    return peak + std::log(value);
}

// Leading small-argument behaviour, for x below any quadrature resolution.
// For nu >= 1 the (2/x)^nu term dominates; for 0 < nu < 1 both reflection
// terms matter; nu = 0 is logarithmic.
inline double bessel_k_small_ln(double nu, double x) {
    if (nu == 0.0) return std::log(-std::log(0.5 * x) - kEulerGamma);
    if (nu < 1.0) {
        const double pref = kPi / (2.0 * std::sin(kPi * nu));
        const double t1 = pref * std::pow(0.5 * x, -nu) / std::tgamma(1.0 - nu);
        const double t2 = pref * std::pow(0.5 * x, nu) / std::tgamma(1.0 + nu);
        return std::log(t1 - t2);
    }
    return ln_gamma(nu) - kLn2 + nu * (kLn2 - std::log(x));
}

} // namespace detail

// log K_order(x); symmetric in the sign of order.
inline double ln_bessel_k(double order, double x) {
    if (!std::isfinite(order)) throw DomainError("ln_bessel_k: non-finite order");
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_bessel_k: requires x > 0");
    const double nu = std::abs(order);
    if (x >= 10.0) {
        double ln_value;
        if (detail::bessel_k_asymptotic(nu, x, ln_value)) return ln_value;
    }
    if (x < 1e-8) return detail::bessel_k_small_ln(nu, x);
    return detail::bessel_k_quad_ln(nu, x);
}

// Modified Bessel function of the second kind K_order(x).
inline double bessel_k(double order, double x) { return std::exp(ln_bessel_k(order, x)); }

} // namespace trimatch
