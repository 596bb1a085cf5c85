#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "trimatch/errors.hpp"

namespace trimatch {

// Streaming raw power sums up to fourth order; mergeable so parallel chunks
// can be reduced in a fixed order for deterministic results.
class MomentAccumulator {
public:
    void add(double x) {
        n_ += 1;
        const double x2 = x * x;
        s1_ += x;
        s2_ += x2;
        s3_ += x2 * x;
        s4_ += x2 * x2;
    }

    void merge(const MomentAccumulator& o) {
        n_ += o.n_;
        s1_ += o.s1_;
        s2_ += o.s2_;
        s3_ += o.s3_;
        s4_ += o.s4_;
    }

    std::int64_t count() const { return n_; }

    double mean() const {
        if (n_ == 0) throw DomainError("MomentAccumulator: empty sample");
        return s1_ / static_cast<double>(n_);
    }

    // Population central moments.
    double m2() const {
        const double m = mean();
        return s2_ / static_cast<double>(n_) - m * m;
    }

    double m4() const {
        const double n = static_cast<double>(n_);
        const double m = mean();
        return s4_ / n - 4.0 * m * s3_ / n + 6.0 * m * m * s2_ / n - 3.0 * m * m * m * m;
    }

    double variance() const { return m2(); }

    // Plain (non-excess) kurtosis m4 / m2^2.
    double kurtosis() const {
        const double v = m2();
        if (!(v > 0.0)) throw DomainError("MomentAccumulator: kurtosis of a zero-variance sample");
        return m4() / (v * v);
    }

private:
    std::int64_t n_ = 0;
    double s1_ = 0.0, s2_ = 0.0, s3_ = 0.0, s4_ = 0.0;
};

inline double sample_kurtosis(std::span<const double> xs) {
    MomentAccumulator acc;
    for (double x : xs) acc.add(x);
    if (acc.count() < 4) throw DomainError("sample_kurtosis: requires at least 4 observations");
    return acc.kurtosis();
}

inline double sample_kurtosis(std::span<const int> xs) {
    MomentAccumulator acc;
    for (int x : xs) acc.add(static_cast<double>(x));
    if (acc.count() < 4) throw DomainError("sample_kurtosis: requires at least 4 observations");
    return acc.kurtosis();
}

} // namespace trimatch
