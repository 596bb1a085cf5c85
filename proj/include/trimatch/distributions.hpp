#pragma once

#include <cmath>

#include "trimatch/errors.hpp"
#include "trimatch/rng.hpp"
#include "trimatch/special.hpp"

namespace trimatch {

namespace detail {

inline double ln_choose(int n, int k) {
    return ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
}

// count * log(p) with the 0 * log(0) = 0 convention.
inline double count_log(int count, double p) {
    if (count == 0) return 0.0;
    return count * std::log(p);
}

// Raw trinomial cell probability; probabilities may sit on the boundary.
inline double trinomial_pmf(int i, int j, int n, double p_x, double p_y) {
    const double p_none = 1.0 - p_x - p_y;
    if ((p_x == 0.0 && i > 0) || (p_y == 0.0 && j > 0) || (p_none <= 0.0 && i + j < n)) return 0.0;
    const double ln_coef = ln_gamma(n + 1.0) - ln_gamma(i + 1.0) - ln_gamma(j + 1.0) -
                           ln_gamma(n - i - j + 1.0);
    return std::exp(ln_coef + count_log(i, p_x) + count_log(j, p_y) + count_log(n - i - j, p_none));
}

} // namespace detail

// Binomial PMF, evaluated in log space.
inline double binomial_pmf(int k, int n, double p) {
    if (n < 0) throw DomainError("binomial_pmf: requires n >= 0");
    if (k < 0 || k > n) throw DomainError("binomial_pmf: requires 0 <= k <= n");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_pmf: requires p in [0,1]");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    return std::exp(detail::ln_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Gamma(shape, rate) sampler (Marsaglia-Tsang squeeze, with the power boost
// for shape < 1); mean = shape/rate.
inline double sample_gamma(double shape, double rate, RngStream& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("sample_gamma: requires shape > 0");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("sample_gamma: requires rate > 0");

    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
        boost = std::pow(rng.next_double(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            const double u1 = rng.next_double();
            const double u2 = rng.next_double();
            z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_double();
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
            return boost * d * v / rate;
        }
    }
}

// Gaussian sampler with mean/variance parameterization (Box-Muller).
inline double sample_normal(double mean, double variance, RngStream& rng) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) throw DomainError("sample_normal: requires variance >= 0");
    if (variance == 0.0) return mean;
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    return mean + std::sqrt(variance) * z;
}

} // namespace trimatch
