#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "trimatch/distributions.hpp"
#include "trimatch/errors.hpp"
#include "trimatch/match.hpp"
#include "trimatch/quadrature.hpp"
#include "trimatch/rng.hpp"
#include "trimatch/special.hpp"
#include "trimatch/stats.hpp"

namespace trimatch {

// Gamma prior on the effective trial count: n ~ Gamma(lambda, lambda/n_hat),
// so E[n] = n_hat and Var[n] = n_hat^2 / lambda.
struct GammaTrialPrior {
    double lambda;
    double n_hat;

    GammaTrialPrior(double lambda_, double n_hat_) : lambda(lambda_), n_hat(n_hat_) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("GammaTrialPrior: requires lambda > 0");
        if (!(n_hat > 0.0) || !std::isfinite(n_hat)) throw DomainError("GammaTrialPrior: requires n_hat > 0");
    }

    double rate() const { return lambda / n_hat; }
};

// Variance Gamma parameters (alpha, beta, lambda, mu) with the derived
// gamma = sqrt(alpha^2 - beta^2).  mu is the location of the density; the
// per-trial drift that generates it lives in vg_params_from_match.
struct VGParams {
    double alpha;
    double beta;
    double lambda;
    double mu;
    double gamma_derived;

    VGParams(double alpha_, double beta_, double lambda_, double mu_)
        : alpha(alpha_), beta(beta_), lambda(lambda_), mu(mu_) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("VGParams: requires alpha > 0");
        if (!(std::abs(beta) < alpha)) throw DomainError("VGParams: requires |beta| < alpha");
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("VGParams: requires lambda > 0");
        if (!std::isfinite(mu)) throw DomainError("VGParams: requires finite mu");
        gamma_derived = std::sqrt((alpha - beta) * (alpha + beta));
    }

    double mean() const {
        const double g2 = gamma_derived * gamma_derived;
        return mu + 2.0 * beta * lambda / g2;
    }

    double variance() const {
        const double g2 = gamma_derived * gamma_derived;
        return (2.0 * lambda / g2) * (1.0 + 2.0 * beta * beta / g2);
    }
};

// Map a match and trial prior to the VG law of the score difference:
// with per-trial drift mu_d = p_x - p_y and variance sigma^2 =
// p_x(1-p_x) + p_y(1-p_y) + 2 p_x p_y,
//   alpha = sqrt(2 lambda / (n_hat sigma^2) + mu_d^2 / sigma^4),
//   beta = mu_d / sigma^2, location 0.
inline VGParams vg_params_from_match(const MatchParams& params, const GammaTrialPrior& prior) {
    const double px = params.p_x, py = params.p_y;
    const double mu_d = px - py;
    const double sig2 = px * (1.0 - px) + py * (1.0 - py) + 2.0 * px * py;
    if (!(sig2 > 0.0)) throw DomainError("vg_params_from_match: per-trial variance is zero");
    const double beta = mu_d / sig2;
    const double alpha = std::sqrt(2.0 * prior.lambda / (prior.n_hat * sig2) + beta * beta);
    return VGParams(alpha, beta, prior.lambda, 0.0);
}

namespace detail {

// Above this shape the Bessel order leaves the supported range; the density
// is then evaluated through the normal-gamma mixture instead.
inline constexpr double kVgAnalyticLambdaMax = 20.5;

// Canonical mixture carrying the same VG law: N ~ Gamma(lambda, gamma^2/2),
// X | N ~ Normal(mu + beta N, N).  (Per-trial variance normalized to 1.)
struct VgMixture {
    double shape, rate, beta, mu;

    explicit VgMixture(const VGParams& vg)
        : shape(vg.lambda),
          rate(0.5 * vg.gamma_derived * vg.gamma_derived),
          beta(vg.beta),
          mu(vg.mu) {}

    double ln_gamma_weight(double n) const {
        return shape * std::log(rate) + (shape - 1.0) * std::log(n) - rate * n - ln_gamma(shape);
    }

    double ln_joint(double x, double n) const {
        const double r = x - mu - beta * n;
        return ln_gamma_weight(n) - 0.5 * r * r / n - 0.5 * std::log(2.0 * kPi * n);
    }
};

// ln f(x) by integrating the mixture over n; used beyond the Bessel range.
inline double vg_ln_pdf_mixture(const VGParams& vg, double x) {
    const VgMixture mix(vg);
    const double n_mean = mix.shape / mix.rate;
    const double n_sd = std::sqrt(mix.shape) / mix.rate;
    double lo = std::max(n_mean * 1e-9, n_mean - 30.0 * n_sd);
    double hi = n_mean + 30.0 * n_sd + std::abs(x - vg.mu);

    auto h = [&](double n) { return mix.ln_joint(x, n); };
    // ternary search for the (unimodal in practice) peak, for log scaling
    double a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (h(m1) < h(m2))
            a = m1;
        else
            b = m2;
    }
    const double n0 = 0.5 * (a + b);
    const double h0 = h(n0);
    const double step = std::max(n_sd * 0.25, (hi - lo) * 1e-4);
    double wl = n0, wh = n0;
    while (wl - step > lo && h(wl - step) > h0 - 45.0) wl -= step;
    wl = std::max(lo, wl - step);
    while (wh + step < hi && h(wh + step) > h0 - 45.0) wh += step;
    wh = std::min(hi, wh + step);

    auto g = [&](double n) { return std::exp(h(n) - h0); };
    const double val = integrate_adaptive(g, wl, wh, 1e-11, 0.0).value;
    return h0 + std::log(val);
}

// CDF by integrating Phi against the gamma weight; used beyond the Bessel range.
inline double vg_cdf_mixture(const VGParams& vg, double x) {
    const VgMixture mix(vg);
    const double n_mode = mix.shape > 1.0 ? (mix.shape - 1.0) / mix.rate : mix.shape / mix.rate;
    const double n_sd = std::sqrt(mix.shape) / mix.rate;
    const double lg0 = mix.ln_gamma_weight(n_mode);
    const double step = std::max(n_sd * 0.25, n_mode * 1e-4);
    double lo = n_mode, hi = n_mode;
    while (lo - step > 0.0 && mix.ln_gamma_weight(lo - step) > lg0 - 45.0) lo -= step;
    lo = std::max(n_mode * 1e-9, lo - step);
    while (mix.ln_gamma_weight(hi + step) > lg0 - 45.0) hi += step;
    hi += step;

    auto g = [&](double n) {
        return std::exp(mix.ln_gamma_weight(n) - lg0) *
               std_normal_cdf((x - mix.mu - mix.beta * n) / std::sqrt(n));
    };
    const double val = integrate_adaptive(g, lo, hi, 1e-11, 1e-300).value;
    return std::clamp(std::exp(lg0) * val, 0.0, 1.0);
}

// ln f(x) from the closed form; requires x != mu and lambda in Bessel range.
inline double vg_ln_pdf_analytic(const VGParams& vg, double x) {
    const double u = std::abs(x - vg.mu);
    const double nu = vg.lambda - 0.5;
    return 2.0 * vg.lambda * std::log(vg.gamma_derived) - 0.5 * std::log(kPi) - ln_gamma(vg.lambda) +
           nu * (std::log(u) - std::log(2.0 * vg.alpha)) + vg.beta * (x - vg.mu) +
           ln_bessel_k(nu, vg.alpha * u);
}

inline double vg_ln_pdf(const VGParams& vg, double x) {
    if (vg.lambda > kVgAnalyticLambdaMax) return vg_ln_pdf_mixture(vg, x);
    return vg_ln_pdf_analytic(vg, x);
}

} // namespace detail

// Variance Gamma density
//   f(x) = gamma^(2 lambda) / (sqrt(pi) Gamma(lambda))
//          (|x-mu| / (2 alpha))^(lambda-1/2) e^(beta (x-mu)) K_(lambda-1/2)(alpha |x-mu|).
// At x = mu: finite small-argument limit for lambda > 1/2, +infinity is
// returned as the singular-point signal for lambda <= 1/2.
inline double vg_pdf(const VGParams& vg, double x) {
    if (!std::isfinite(x)) throw DomainError("vg_pdf: non-finite x");
    if (x == vg.mu) {
        if (vg.lambda > 0.5) {
            return std::exp(2.0 * vg.lambda * std::log(vg.gamma_derived) - 0.5 * std::log(kPi) -
                            ln_gamma(vg.lambda) + ln_gamma(vg.lambda - 0.5) - kLn2 +
                            (1.0 - 2.0 * vg.lambda) * std::log(vg.alpha));
        }
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(detail::vg_ln_pdf(vg, x));
}

namespace detail {

// Mass of the VG density over the finite interval [a, b].  Splits at the
// location point; for lambda <= 1/2 (plus margin) the |x-mu|^(2 lambda - 1)
// singularity is absorbed by the substitution u = s^(1/(2 lambda)).
inline double vg_mass_between(const VGParams& vg, double a, double b) {
    if (!(b > a)) return 0.0;
    const double rel = 1e-9, abs_floor = 1e-13;
    auto plain = [&](double lo, double hi) {
        if (!(hi > lo)) return 0.0;
        return integrate_adaptive([&](double x) { return std::exp(vg_ln_pdf_analytic(vg, x)); }, lo,
                                  hi, rel, abs_floor)
            .value;
    };
    // one-sided mass over (mu, mu + w] or [mu - w, mu) via the substitution
    auto near_side = [&](double w, double sign) {
        if (!(w > 0.0)) return 0.0;
        const double two_lambda = 2.0 * vg.lambda;
        const double jac_pow = 1.0 / two_lambda - 1.0;
        auto g = [&](double s) {
            const double u = std::pow(s, 1.0 / two_lambda);
            return std::exp(vg_ln_pdf_analytic(vg, vg.mu + sign * u)) *
                   std::pow(s, jac_pow) / two_lambda;
        };
        return integrate_adaptive(g, 0.0, std::pow(w, two_lambda), rel, abs_floor).value;
    };

    double total = 0.0;
    const bool singularish = vg.lambda <= 0.55;
    if (a < vg.mu && b > vg.mu) {
        total += vg_mass_between(vg, a, vg.mu) + vg_mass_between(vg, vg.mu, b);
    } else if (singularish && a >= vg.mu && a - vg.mu < 1.0) {
        const double w = std::min(b, vg.mu + 1.0) - vg.mu;
        total += near_side(w, 1.0) - near_side(a - vg.mu, 1.0) + plain(std::min(b, vg.mu + 1.0), b);
    } else if (singularish && b <= vg.mu && vg.mu - b < 1.0) {
        const double w = vg.mu - std::max(a, vg.mu - 1.0);
        total += near_side(w, -1.0) - near_side(vg.mu - b, -1.0) + plain(a, std::max(a, vg.mu - 1.0));
    } else {
        total += plain(a, b);
    }
    return std::max(total, 0.0);
}

// Truncation bound: walk outward until the log-density is far beneath any
// mass that could matter at the CDF tolerance.
inline double vg_support_edge(const VGParams& vg, double sign) {
    const double decay = sign > 0 ? vg.alpha - vg.beta : vg.alpha + vg.beta;
    const double sd = std::sqrt(vg.variance());
    double t = vg.mean() + sign * (8.0 * sd + 1.0);
    const double step = 8.0 / decay + sd;
    while (vg_ln_pdf(vg, t) > -46.0) t += sign * step;
    return t;
}

} // namespace detail

// Variance Gamma CDF, absolute error <= 1e-7.
inline double vg_cdf(const VGParams& vg, double x) {
    if (!std::isfinite(x)) throw DomainError("vg_cdf: non-finite x");
    if (vg.lambda > detail::kVgAnalyticLambdaMax) return detail::vg_cdf_mixture(vg, x);
    const double left = detail::vg_support_edge(vg, -1.0);
    if (x <= left) return 0.0;
    const double right = detail::vg_support_edge(vg, 1.0);
    if (x >= right) return 1.0;
    if (x <= vg.mean()) return std::clamp(detail::vg_mass_between(vg, left, x), 0.0, 1.0);
    return std::clamp(1.0 - detail::vg_mass_between(vg, x, right), 0.0, 1.0);
}

// CDF on an ascending grid via one cumulative sweep; clamped and monotone by
// construction.
inline std::vector<double> vg_cdf_grid(const VGParams& vg, std::span<const double> xs) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] >= xs[i - 1])) throw DomainError("vg_cdf_grid: grid must be ascending");
    std::vector<double> out(xs.size());
    if (xs.empty()) return out;
    if (vg.lambda > detail::kVgAnalyticLambdaMax) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = detail::vg_cdf_mixture(vg, xs[i]);
        for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], out[i - 1]);
        return out;
    }
    double acc = vg_cdf(vg, xs[0]);
    out[0] = std::clamp(acc, 0.0, 1.0);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        acc += detail::vg_mass_between(vg, xs[i - 1], xs[i]);
        out[i] = std::max(std::clamp(acc, 0.0, 1.0), out[i - 1]);
    }
    return out;
}

enum class VgSampleMode { continuous, discrete };

// One draw of the match score difference under the gamma trial prior.
// Continuous mode is exactly VG-distributed; discrete mode rounds the trial
// count and runs real trinomial trials.
inline double sample_vg_match_diff(const MatchParams& params, const GammaTrialPrior& prior,
                                   RngStream& rng, VgSampleMode mode) {
    const double n = sample_gamma(prior.lambda, prior.rate(), rng);
    const double px = params.p_x, py = params.p_y;
    if (mode == VgSampleMode::continuous) {
        const double mu_d = px - py;
        const double sig2 = px * (1.0 - px) + py * (1.0 - py) + 2.0 * px * py;
        return sample_normal(n * mu_d, n * sig2, rng);
    }
    const long long m = std::max(0LL, std::llround(n));
    const double cut = px + py;
    long long diff = 0;
    for (long long t = 0; t < m; ++t) {
        const double u = rng.next_double();
        if (u < px)
            ++diff;
        else if (u < cut)
            --diff;
    }
    return static_cast<double>(diff);
}

// VG match outcomes from the +/-0.5 bands.  Default: win_x is the survival
// form 1 - VG(0.5), so the triple partitions; strict_printed_form instead
// takes win_x = VG(0.5) literally (the other two components are unchanged,
// and the triple then need not sum to one).
inline OutcomeProbs vg_match_outcomes(const MatchParams& params, const GammaTrialPrior& prior,
                                      bool strict_printed_form = false) {
    const VGParams vg = vg_params_from_match(params, prior);
    const double f_hi = vg_cdf(vg, 0.5);
    const double f_lo = vg_cdf(vg, -0.5);
    const double draw = std::max(0.0, f_hi - f_lo);
    const double win_x = strict_printed_form ? f_hi : 1.0 - f_hi;
    return {win_x, draw, f_lo};
}

// Extension: overall winner with draws allocated by the p_x/(p_x+p_y) rule.
inline double vg_overall_win_x(const MatchParams& params, const GammaTrialPrior& prior,
                               bool strict_printed_form = false) {
    const OutcomeProbs probs = vg_match_outcomes(params, prior, strict_printed_form);
    return std::clamp(probs.win_x + probs.draw * detail::tie_share_x(params), 0.0, 1.0);
}

// Kurtosis of a Student-t distribution with r degrees of freedom.
inline double t_kurtosis(double r) {
    if (!(r > 4.0) || !std::isfinite(r)) throw DomainError("t_kurtosis: requires r > 4");
    return (3.0 * r - 6.0) / (r - 4.0);
}

inline constexpr double kVgKurtosisThreshold = 3.05;

// Strict-inequality gate: heavy tails beyond the t_121 benchmark.
inline bool vg_recommendation(double kurtosis) { return kurtosis > kVgKurtosisThreshold; }

struct VgGateResult {
    double kurtosis;
    bool vg_recommended;
};

// Applicability gate on observed point differences.
inline VgGateResult vg_gate(std::span<const int> points_differences) {
    if (points_differences.size() < 4)
        throw DomainError("vg_gate: requires at least 4 observations");
    const double k = sample_kurtosis(points_differences);
    return {k, vg_recommendation(k)};
}

} // namespace trimatch
