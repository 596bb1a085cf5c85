#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "trimatch/errors.hpp"

namespace trimatch {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule
// (QUADPACK dqk15 constants).  Gauss nodes are kGkX[1], kGkX[3], kGkX[5], 0.
inline constexpr double kGkX[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
inline constexpr double kGkWK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr double kGkWG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct GkPanel {
    double a, b, value, error;
    bool operator<(const GkPanel& o) const { return error < o.error; }
};

// One Gauss-Kronrod pass over [a, b]; error taken as |K15 - G7|,
// a deliberately conservative estimate of the K15 error.
template <typename F>
GkPanel gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k15 = kGkWK[7] * fc;
    double g7 = kGkWG[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = h * kGkX[i];
        const double sum = f(c - x) + f(c + x);
        k15 += kGkWK[i] * sum;
        if (i % 2 == 1) g7 += kGkWG[i / 2] * sum;
    }
    return {a, b, k15 * h, std::abs((k15 - g7) * h)};
}

} // namespace detail

// Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].
// Splits the panel with the largest error estimate until the total estimated
// error falls below max(abs_tol, rel_tol * |integral|) or max_panels is hit.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                                    double abs_tol = 0.0, int max_panels = 4000) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate_adaptive: non-finite interval");
    if (a == b) return {0.0, 0.0, 0, true};

    std::priority_queue<detail::GkPanel> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value;
    double err = first.error;
    int panels = 1;
    heap.push(first);

    while (err > std::max(abs_tol, rel_tol * std::abs(total)) && panels < max_panels) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval at floating-point resolution
            heap.push({worst.a, worst.b, worst.value, 0.0});
            err -= worst.error;
            continue;
        }
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        panels += 1;
        heap.push(left);
        heap.push(right);
    }
    return {total, err, panels, err <= std::max(abs_tol, rel_tol * std::abs(total))};
}

} // namespace trimatch
