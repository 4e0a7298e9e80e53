#pragma once

#include "tripert/rng.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tripert {

/// A moment value together with its Monte Carlo standard error. The error is
/// exactly zero for closed-form and quadrature results.
struct Moment {
    double value = 0.0;
    double se = 0.0;
};

// ---------------------------------------------------------------------------
// Families for the diagonal entry a.
// ---------------------------------------------------------------------------

/// log a ~ N(mu, sigma2).
struct LogNormalA {
    double mu = 0.0;
    double sigma2 = 1.0;
};

/// a == c.
struct ConstantA {
    double c = 1.0;
};

/// a takes `values[i]` with probability `probs[i]`. Purely atomic, so it is
/// declared arithmetic and only produces a warning in the Cramer report.
struct DiscreteA {
    std::vector<double> values;
    std::vector<double> probs;
};

/// a = lambda * Z^2 + shift with Z standard normal (squared-GARCH form).
struct ShiftedSquareA {
    double lambda = 0.0;
    double shift = 0.0;
};

/// User-registered family. Moments without a closed form are computed by
/// Monte Carlo over a fixed pool of draws, so they are deterministic,
/// smooth in beta, and carry a standard error.
struct CustomA {
    std::string name = "custom";
    std::function<double(RandomStream&)> sampler;
    /// Optional closed form for E a^beta.
    std::function<double(double)> mellin;
    /// Optional density on (0, inf); kept for reporting only.
    std::function<double(double)> density;
    /// Open finiteness interval of beta -> E a^beta.
    double beta_lo = -std::numeric_limits<double>::infinity();
    double beta_hi = std::numeric_limits<double>::infinity();
    /// Essential supremum of a, used by the rejection tilt.
    double support_max = std::numeric_limits<double>::infinity();
    bool non_arithmetic = true;
    std::size_t mc_samples = 1'000'000;
    std::uint64_t mc_seed = 0x5EEDu;
};

using AFamily = std::variant<LogNormalA, ConstantA, DiscreteA, ShiftedSquareA, CustomA>;

// ---------------------------------------------------------------------------
// Families for y = a12 / a and for the translation vector b.
// ---------------------------------------------------------------------------

struct ConstantY {
    double c = 0.0;
};
struct GaussianY {
    double mean = 0.0;
    double var = 1.0;
};
/// y = lambda * (log a - offset); dependent on a by construction.
struct AffineInLogA {
    double lambda = 1.0;
    double offset = 0.0;
};
using YFamily = std::variant<ConstantY, GaussianY, AffineInLogA>;

struct ConstantB {
    double c = 0.0;
};
struct GaussianB {
    double mean = 0.0;
    double var = 1.0;
};
struct ExponentialB {
    double rate = 1.0;
};
using BFamily = std::variant<ConstantB, GaussianB, ExponentialB>;

/// One draw of (a, y, b1, b2). The matrix is A = [[a, y a], [0, a]].
struct CoefficientSample {
    double a = 1.0;
    double y = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
};

/// Joint law of (a, y, b1, b2). Immutable after construction and safe to
/// share across threads.
///
/// Dependence: b1 and b2 are always independent of (a, y) and of each other,
/// except that with `symmetrize_b` the pair (b1, b2) is multiplied by one
/// common Rademacher sign per step. y is independent of a unless it is
/// AffineInLogA.
class CoefficientLaw {
public:
    CoefficientLaw(AFamily a, YFamily y, BFamily b1, BFamily b2, bool symmetrize_b = false);

    const AFamily& a_family() const noexcept { return a_; }
    const YFamily& y_family() const noexcept { return y_; }
    const BFamily& b1_family() const noexcept { return b1_; }
    const BFamily& b2_family() const noexcept { return b2_; }
    bool symmetrize_b() const noexcept { return symmetrize_b_; }

    /// One independent draw. Draw order: a, y, b1, b2, sign.
    CoefficientSample sample(RandomStream& rng) const;
    double sample_a(RandomStream& rng) const;
    /// Draw (y, b1, b2) given an already drawn a.
    CoefficientSample complete(double a, RandomStream& rng) const;
    /// y as a function of a for AffineInLogA, otherwise a fresh draw.
    double sample_y(double a, RandomStream& rng) const;
    /// Draw (b1, b2) alone, including the common sign when symmetrized.
    std::pair<double, double> sample_b(RandomStream& rng) const;

    /// E[a^beta g(log a)]. Throws DomainError outside the finiteness domain.
    Moment expect_a(double beta, const std::function<double(double)>& g) const;
    /// Open interval of beta for which E a^beta is finite.
    std::pair<double, double> mellin_domain() const;
    bool in_mellin_domain(double beta) const;

    bool a_is_degenerate() const;
    bool y_depends_on_a() const noexcept;
    /// True when y == 0 almost surely.
    bool y_is_zero() const noexcept;
    /// Declared by family: continuous families are non-arithmetic.
    bool non_arithmetic() const noexcept;

    /// E|b|^p for b1 (component 1) or b2 (component 2), including the sign.
    double b_abs_moment(int component, double p) const;
    /// E b for component 1 or 2 (zero when symmetrized).
    double b_mean(int component) const;
    /// E|y|^p under the base law.
    double y_abs_moment(double p) const;

    std::string describe() const;

private:
    Moment custom_expect(double beta, const std::function<double(double)>& g) const;

    AFamily a_;
    YFamily y_;
    BFamily b1_;
    BFamily b2_;
    bool symmetrize_b_ = false;
    std::shared_ptr<const std::vector<double>> mc_pool_;
};

/// E a^beta.
Moment mellin(const CoefficientLaw& law, double beta);
/// E a^beta log a.
Moment mellin_log(const CoefficientLaw& law, double beta);
/// E a^beta (log a)^2.
Moment mellin_log2(const CoefficientLaw& law, double beta);

struct CrossMoments {
    Moment s;      ///< E y a^alpha
    Moment abs_r;  ///< E |y|^r a^alpha
};
CrossMoments cross_moments(const CoefficientLaw& law, double alpha, double r);

/// Bivariate GARCH(1,1)-style preset: a = lam Z^2 + beta_coef, y == coupling,
/// b = (omega1, omega2). lam == 0 degenerates to a == beta_coef.
CoefficientLaw garch_preset(double omega1, double omega2, double lam, double beta_coef,
                            double coupling);

}  // namespace tripert
