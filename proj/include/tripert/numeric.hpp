#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

namespace tripert {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sample mean and standard error of i.i.d. observations, accumulated with
/// compensated sums so that merge order (not worker count) fixes the result.
class MeanAccumulator {
public:
    void add(double x) noexcept {
        ++n_;
        sum_.add(x);
        sum_sq_.add(x * x);
    }
    void merge(const MeanAccumulator& other) noexcept {
        n_ += other.n_;
        sum_.merge(other.sum_);
        sum_sq_.merge(other.sum_sq_);
    }
    std::size_t count() const noexcept { return n_; }
    double sum() const noexcept { return sum_.value(); }
    double sum_sq() const noexcept { return sum_sq_.value(); }
    double mean() const noexcept { return n_ == 0 ? 0.0 : sum() / static_cast<double>(n_); }
    double variance() const noexcept {
        if (n_ < 2) return 0.0;
        const double n = static_cast<double>(n_);
        const double m = mean();
        const double v = (sum_sq() - n * m * m) / (n - 1.0);
        return v > 0.0 ? v : 0.0;
    }
    double standard_error() const noexcept {
        return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
    }
    /// (sum x)^2 / sum x^2: effective sample size of a weighted estimator.
    double effective_sample_size() const noexcept {
        const double s2 = sum_sq();
        return s2 > 0.0 ? sum() * sum() / s2 : 0.0;
    }

private:
    std::size_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

inline double normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x), accurate far into the tail.
inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Adaptive Gauss-Kronrod quadrature on [lo, hi]; either bound may be infinite.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tolerance = 1e-12);

/// E[f(Z)] for Z ~ N(mean, sd^2), by quadrature.
double gaussian_expectation(const std::function<double(double)>& f, double mean, double sd);

/// E|X|^p for X ~ N(mean, var). Closed form when mean == 0.
double gaussian_abs_moment(double mean, double var, double p);

}  // namespace tripert
