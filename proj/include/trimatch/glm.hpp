#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "trimatch/distributions.hpp"
#include "trimatch/errors.hpp"
#include "trimatch/special.hpp"

namespace trimatch {

struct GlmOptions {
    int max_iterations = 50;
    double deviance_tol = 1e-8;
    double ridge = 0.0;              // diagnostic stabilizer; skips the rank check
    bool compute_inference = true;   // standard errors / z / p (off for selection loops)
};

struct GlmFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd z_values;
    Eigen::VectorXd p_values;
    double deviance = std::numeric_limits<double>::quiet_NaN();
    double aic = std::numeric_limits<double>::quiet_NaN();
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
};

namespace detail {

inline double inv_logit_clipped(double eta) {
    const double p = 1.0 / (1.0 + std::exp(-eta));
    return std::clamp(p, 1e-12, 1.0 - 1e-12);
}

inline double binom_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& n,
                             const Eigen::VectorXd& p) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double mu = n[i] * p[i];
        if (y[i] > 0.0) d += y[i] * std::log(y[i] / mu);
        const double rest = n[i] - y[i];
        if (rest > 0.0) d += rest * std::log(rest / (n[i] - mu));
    }
    return 2.0 * d;
}

inline double binom_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& n,
                                   const Eigen::VectorXd& p) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ll += ln_choose(static_cast<int>(n[i]), static_cast<int>(y[i])) + y[i] * std::log(p[i]) +
              (n[i] - y[i]) * std::log1p(-p[i]);
    }
    return ll;
}

} // namespace detail

// Binomial-logit GLM via iteratively reweighted least squares.
// Convergence requires |delta deviance| < deviance_tol together with a
// stalled coefficient step; separated fits keep sliding along the boundary
// and therefore hit the iteration cap, which raises NonConvergenceError.
inline GlmFit fit_binomial_logit_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& successes,
                                      const Eigen::VectorXd& trials, const Eigen::VectorXd& offset,
                                      const std::vector<std::string>& column_names,
                                      const GlmOptions& opt = {}) {
    const Eigen::Index m = X.rows(), p = X.cols();
    if (m == 0 || p == 0) throw DomainError("fit_binomial_logit_irls: empty design");
    if (successes.size() != m || trials.size() != m || offset.size() != m)
        throw DomainError("fit_binomial_logit_irls: size mismatch");
    if (static_cast<Eigen::Index>(column_names.size()) != p)
        throw DomainError("fit_binomial_logit_irls: one name per column required");
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(trials[i] > 0.0) || successes[i] < 0.0 || successes[i] > trials[i])
            throw DomainError("fit_binomial_logit_irls: requires 0 <= successes <= trials, trials > 0");
    }

    if (opt.ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < p) {
            const auto perm = qr.colsPermutation().indices();
            std::ostringstream msg;
            msg << "singular fit: linearly dependent columns:";
            for (Eigen::Index k = qr.rank(); k < p; ++k) msg << " " << column_names[perm[k]];
            throw SingularFitError(msg.str());
        }
    }

    Eigen::VectorXd eta(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double frac = (successes[i] + 0.5) / (trials[i] + 1.0);
        eta[i] = std::log(frac / (1.0 - frac));
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd prob(m), w(m), working(m);
    double deviance_old = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;

    for (int it = 1; it <= opt.max_iterations; ++it) {
        iterations = it;
        for (Eigen::Index i = 0; i < m; ++i) {
            prob[i] = detail::inv_logit_clipped(eta[i]);
            w[i] = std::max(trials[i] * prob[i] * (1.0 - prob[i]), 1e-12);
            working[i] = (eta[i] - offset[i]) + (successes[i] - trials[i] * prob[i]) / w[i];
        }
        Eigen::MatrixXd xtw = X.transpose() * w.asDiagonal();
        Eigen::MatrixXd a = xtw * X;
        if (opt.ridge > 0.0) a.diagonal().array() += opt.ridge;
        const Eigen::VectorXd beta_new = a.ldlt().solve(xtw * working);

        eta = X * beta_new + offset;
        for (Eigen::Index i = 0; i < m; ++i) prob[i] = detail::inv_logit_clipped(eta[i]);
        const double deviance_new = detail::binom_deviance(successes, trials, prob);
        const double step = (beta_new - beta).lpNorm<Eigen::Infinity>();
        beta = beta_new;
        if (std::abs(deviance_new - deviance_old) < opt.deviance_tol &&
            step < 1e-6 * std::max(1.0, beta.lpNorm<Eigen::Infinity>())) {
            deviance_old = deviance_new;
            converged = true;
            break;
        }
        deviance_old = deviance_new;
    }
    if (!converged)
        throw NonConvergenceError(
            "IRLS did not converge within the iteration cap (possible separation: fitted "
            "probabilities pinned at 0/1)");

    GlmFit fit;
    fit.coefficients = beta;
    fit.iterations = iterations;
    fit.deviance = deviance_old;
    fit.log_likelihood = detail::binom_log_likelihood(successes, trials, prob);
    fit.aic = -2.0 * fit.log_likelihood + 2.0 * static_cast<double>(p);

    if (opt.compute_inference) {
        for (Eigen::Index i = 0; i < m; ++i)
            w[i] = std::max(trials[i] * prob[i] * (1.0 - prob[i]), 1e-12);
        Eigen::MatrixXd a = X.transpose() * w.asDiagonal() * X;
        if (opt.ridge > 0.0) a.diagonal().array() += opt.ridge;
        const Eigen::MatrixXd cov = a.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
        fit.standard_errors.resize(p);
        fit.z_values.resize(p);
        fit.p_values.resize(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            fit.standard_errors[j] = std::sqrt(std::max(cov(j, j), 0.0));
            fit.z_values[j] = beta[j] / fit.standard_errors[j];
            fit.p_values[j] = 2.0 * std_normal_cdf(-std::abs(fit.z_values[j]));
        }
    }
    return fit;
}

} // namespace trimatch
