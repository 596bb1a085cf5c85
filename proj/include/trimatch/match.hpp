#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "trimatch/distributions.hpp"
#include "trimatch/errors.hpp"
#include "trimatch/rng.hpp"
#include "trimatch/special.hpp"

namespace trimatch {

// Trials per curling match: 8 stones x 10 ends.
inline constexpr int kCurlingTrials = 80;

// Per-trial scoring probabilities of the two teams.  Strict interior of the
// simplex: both teams can score and so can neither (the trinomial "no score"
// outcome exists).
struct MatchParams {
    double p_x;
    double p_y;

    MatchParams(double px, double py) : p_x(px), p_y(py) {
        if (!(px > 0.0) || !(py > 0.0) || !(px + py < 1.0) || !std::isfinite(px) || !std::isfinite(py))
            throw DomainError("MatchParams: requires 0 < p_x, 0 < p_y, p_x + p_y < 1");
    }

    // Relaxed constructor for degenerate studies (tests only): permits p = 0.
    static MatchParams unchecked(double px, double py) {
        if (!(px >= 0.0) || !(py >= 0.0) || !(px + py <= 1.0))
            throw DomainError("MatchParams::unchecked: requires p_x, p_y >= 0, p_x + p_y <= 1");
        MatchParams mp;
        mp.p_x = px;
        mp.p_y = py;
        return mp;
    }

private:
    MatchParams() : p_x(0), p_y(0) {}
};

struct OutcomeProbs {
    double win_x;
    double draw;
    double win_y;
};

struct ScoreMoments {
    double mean_x;
    double mean_y;
    double var_x;
    double var_y;
    double cov_xy;
};

inline double trinomial_joint_pmf(int i, int j, int n, const MatchParams& params) {
    if (n < 0) throw DomainError("trinomial_joint_pmf: requires n >= 0");
    if (i < 0 || j < 0 || i + j > n) throw DomainError("trinomial_joint_pmf: requires i, j >= 0, i + j <= n");
    return detail::trinomial_pmf(i, j, n, params.p_x, params.p_y);
}

inline ScoreMoments score_moments(const MatchParams& params, int n) {
    if (n < 1) throw DomainError("score_moments: requires n >= 1");
    const double px = params.p_x, py = params.p_y;
    return {n * px, n * py, n * px * (1.0 - px), n * py * (1.0 - py), -static_cast<double>(n) * px * py};
}

namespace detail {

// Standard deviation of X - Y over n trials; the scale of the Gaussian
// approximation (var_x + var_y - 2 cov = var_x + var_y + 2 n p_x p_y).
inline double diff_sd(const MatchParams& params, int n) {
    const double px = params.p_x, py = params.p_y;
    return std::sqrt(n * (px * (1.0 - px) + py * (1.0 - py) + 2.0 * px * py));
}

// Tie allocation share for X ("winning stone rolled").
inline double tie_share_x(const MatchParams& params) {
    const double total = params.p_x + params.p_y;
    if (total == 0.0) return 0.5;  // degenerate relaxed params: no principled winner
    return params.p_x / total;
}

} // namespace detail

// Gaussian approximation to Pr(X wins) with 0.5 continuity correction.
inline double win_prob_gaussian(const MatchParams& params, int n) {
    if (n < 1) throw DomainError("win_prob_gaussian: requires n >= 1");
    const double delta = n * (params.p_x - params.p_y);
    return std_normal_cdf((delta - 0.5) / detail::diff_sd(params, n));
}

// Gaussian approximation to Pr(draw).
inline double draw_prob_gaussian(const MatchParams& params, int n) {
    if (n < 1) throw DomainError("draw_prob_gaussian: requires n >= 1");
    const double delta = n * (params.p_x - params.p_y);
    const double s = detail::diff_sd(params, n);
    const double d = std_normal_cdf((0.5 - delta) / s) + std_normal_cdf((0.5 + delta) / s) - 1.0;
    return std::clamp(d, 0.0, 1.0);
}

struct CurlingOutcomes {
    OutcomeProbs overall;   // extra ends resolve all ties, so overall.draw == 0
    double win_after_10;    // X ahead after regulation
    double draw_after_10;   // level after regulation
};

// Curling match outcomes at n = 80: Gaussian regulation probabilities plus
// the sudden-death tie allocation p_x / (p_x + p_y).
inline CurlingOutcomes curling_outcomes(const MatchParams& params) {
    const double w10 = win_prob_gaussian(params, kCurlingTrials);
    const double d10 = draw_prob_gaussian(params, kCurlingTrials);
    const double win = std::clamp(w10 + d10 * detail::tie_share_x(params), 0.0, 1.0);
    return {{win, 0.0, 1.0 - win}, w10, d10};
}

// Exact win/draw/loss by full trinomial enumeration; oracle for the Gaussian
// approximations.  Quadratic in n, so guarded.
inline OutcomeProbs exact_outcomes(const MatchParams& params, int n, bool allocate_ties = false) {
    if (n < 1) throw DomainError("exact_outcomes: requires n >= 1");
    if (n > 200) throw CapacityError("exact_outcomes: n > 200 unsupported (quadratic enumeration)");

    const double px = params.p_x, py = params.p_y;
    const double p_none = 1.0 - px - py;
    std::vector<double> lf(n + 2, 0.0);
    for (int k = 1; k < static_cast<int>(lf.size()); ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));

    // Neumaier-compensated sums: ~n^2/2 cells for each outcome.
    double sums[3] = {0.0, 0.0, 0.0};
    double comps[3] = {0.0, 0.0, 0.0};
    auto accumulate = [&](int which, double term) {
        const double t = sums[which] + term;
        if (std::abs(sums[which]) >= std::abs(term))
            comps[which] += (sums[which] - t) + term;
        else
            comps[which] += (term - t) + sums[which];
        sums[which] = t;
    };

    for (int i = 0; i <= n; ++i) {
        if (px == 0.0 && i > 0) break;
        for (int j = 0; j <= n - i; ++j) {
            if (py == 0.0 && j > 0) break;
            const int rest = n - i - j;
            if (p_none == 0.0 && rest > 0) continue;
            const double lp = lf[n] - lf[i] - lf[j] - lf[rest] + detail::count_log(i, px) +
                              detail::count_log(j, py) + detail::count_log(rest, p_none);
            accumulate(i > j ? 0 : (i == j ? 1 : 2), std::exp(lp));
        }
    }
    double win = sums[0] + comps[0];
    double draw = sums[1] + comps[1];
    double loss = sums[2] + comps[2];
    if (allocate_ties) {
        const double share = detail::tie_share_x(params);
        win += draw * share;
        loss += draw * (1.0 - share);
        draw = 0.0;
    }
    return {win, draw, loss};
}

enum class Winner { X, Y };

struct MatchResult {
    int score_x;
    int score_y;
    Winner winner;
};

// One simulated match: n trinomial trials, ties resolved by the allocation
// rule.  Takes the stream by value, so a caller's stream is not advanced.
inline MatchResult simulate_match(const MatchParams& params, int n, RngStream rng) {
    if (n < 1) throw DomainError("simulate_match: requires n >= 1");
    const double px = params.p_x;
    const double cut = params.p_x + params.p_y;
    int x = 0, y = 0;
    for (int t = 0; t < n; ++t) {
        const double u = rng.next_double();
        if (u < px)
            ++x;
        else if (u < cut)
            ++y;
    }
    Winner w;
    if (x != y)
        w = x > y ? Winner::X : Winner::Y;
    else
        w = rng.next_double() < detail::tie_share_x(params) ? Winner::X : Winner::Y;
    return {x, y, w};
}

} // namespace trimatch
