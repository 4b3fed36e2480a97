#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"

namespace meandense {

// Neumaier-compensated sum. Adding the same values in the same order always
// gives the same bits, and the rounding error does not grow with the count.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double v) noexcept {
        add(v);
        return *this;
    }

    void add(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value();
}

// Sample mean and unbiased variance accumulated with compensated sums.
class MeanVariance {
public:
    void add(double v) noexcept {
        ++n_;
        sum_.add(v);
        sum_sq_.add(v * v);
    }

    void merge(const MeanVariance& other) noexcept {
        n_ += other.n_;
        sum_.add(other.sum_);
        sum_sq_.add(other.sum_sq_);
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }

    double variance() const noexcept {
        if (n_ < 2) return 0.0;
        const double m = mean();
        const double v = (sum_sq_.value() - static_cast<double>(n_) * m * m) / static_cast<double>(n_ - 1);
        return v > 0.0 ? v : 0.0;
    }

    // Standard error of the mean.
    double standard_error() const noexcept { return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

// A Monte Carlo (or exact, with zero error) estimate.
struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
};

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights; // sum to 2
};

// Gauss-Legendre rule of the given order by Newton iteration on P_order.
// Exact for polynomials of degree <= 2*order - 1.
inline GaussLegendreRule compute_gauss_legendre(int order) {
    if (order < 1 || order > 256) throw ConfigError("quadrature order must be in [1, 256]");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(order - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    return rule;
}

// Cached rules; the returned reference stays valid for the program lifetime.
inline const GaussLegendreRule& gauss_legendre(int order) {
    static std::mutex mutex;
    static std::map<int, GaussLegendreRule> cache;
    std::scoped_lock lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

// Least-squares slope of y on x. With `through_origin` the intercept is fixed at 0.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y, bool through_origin) {
    if (x.size() != y.size() || x.size() < (through_origin ? 1u : 2u))
        throw ConfigError("least_squares_slope: need matching inputs with enough points");
    const auto n = static_cast<double>(x.size());
    if (through_origin) {
        CompensatedSum sxy, sxx;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy.add(x[i] * y[i]);
            sxx.add(x[i] * x[i]);
        }
        return sxy.value() / sxx.value();
    }
    const double mx = compensated_sum(x) / n;
    const double my = compensated_sum(y) / n;
    CompensatedSum sxy, sxx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy.add((x[i] - mx) * (y[i] - my));
        sxx.add((x[i] - mx) * (x[i] - mx));
    }
    return sxy.value() / sxx.value();
}

} // namespace meandense
