#pragma once

#include "tripert/cramer.hpp"
#include "tripert/model.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tripert {

/// E Z^alpha 1{Z >= 0} for Z ~ N(0, K11). Throws DegenerateError if K11 == 0.
double c0_of_K(const SymMatrix2& K, double alpha);

/// Integral of z^alpha phi_{K11}(z) over (1/delta, delta); zero for delta <= 1.
double c0_truncated(const SymMatrix2& K, double alpha, double delta);

enum class ConstantMethod { goldie_formula, tail_regression };

/// Tail constants of X2 (and, when y == 0, of X1 = X1').
struct TailConstants {
    double c_plus = 0.0;
    double c_minus = 0.0;
    double se_plus = 0.0;
    double se_minus = 0.0;
    /// Same constants for the series driven by b1; NaN unless y == 0.
    double c1_plus = std::numeric_limits<double>::quiet_NaN();
    double c1_minus = std::numeric_limits<double>::quiet_NaN();
    double se1_plus = 0.0;
    double se1_minus = 0.0;
    ConstantMethod method = ConstantMethod::goldie_formula;
    std::size_t n_samples = 0;
    /// Support criterion for strict positivity of each constant.
    bool plus_positive = true;
    bool minus_positive = true;
    std::vector<std::string> warnings;
};

struct GoldieOptions {
    std::size_t n_samples = 1'000'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double trunc_tol = 1e-12;
    /// Optional cap on |integrand| (biased; off by default).
    std::optional<double> clip;
};

/// c+ = E[((a W + b2)_+)^alpha - ((a W)_+)^alpha] / (alpha rho) and the mirror
/// formula for c-, with W ~ X2 drawn independently of (a, b2). Each replica
/// evaluates both powers on the same (a, W, b2).
TailConstants goldie_constants(const CoefficientLaw& law, const CramerReport& cramer,
                               const GoldieOptions& options = {});

/// Support-based positivity test: the right constant of sum Pi_{n-1} b_n is
/// positive iff P(a = 1, b > 0) > 0, or there are support points (u1, v1),
/// (u2, v2) with u1 > 1 > u2 and v1 / (1 - u1) < v2 / (1 - u2). Decided on
/// `n_samples` draws of (a, b2); pass sign = -1 for the left constant.
bool tail_constant_positive(const CoefficientLaw& law, double sign, std::size_t n_samples = 20'000,
                            std::uint64_t seed = 0xC0DEu);

enum class Regime { centered, noncentered, decoupled };
std::string to_string(Regime r);

struct PredictionReport {
    Regime regime = Regime::centered;
    double alphatilde = 0.0;
    /// lim P(X1 > t) t^alpha (log t)^{-alphatilde}, and the left analogue.
    double limit_right = 0.0;
    double limit_left = 0.0;
    /// The same limits with rho raised to +alphatilde instead of -alphatilde.
    /// With n0 = log t / rho the block length grows like (log t) / rho, so the
    /// CLT scale contributes rho^{-alphatilde}; the + form is kept only for
    /// comparison.
    double literal_right = 0.0;
    double literal_left = 0.0;
    // Ingredients.
    double alpha = 0.0;
    double rho = 0.0;
    double s = 0.0;
    double c0 = 0.0;
    double c_plus = 0.0;
    double c_minus = 0.0;
    /// X2 tails: P(X2 > t) t^alpha -> c_plus, P(X2 < -t) t^alpha -> c_minus.
    double x2_right = 0.0;
    double x2_left = 0.0;
    std::string projection_note;
    std::vector<std::string> warnings;
};

/// Regime from s: exactly computed s (zero standard error) is centered iff it
/// vanishes to rounding; Monte Carlo s is centered iff |s| <= 3 se. y == 0
/// (K11 == 0 and s == 0) is the decoupled regime.
Regime decide_regime(const CramerReport& cramer);

PredictionReport predicted_limits(const CramerReport& cramer, const TailConstants& constants);

struct LdApproximation {
    double value = 0.0;
    double tilt = 0.0;    ///< beta with Lambda'(beta) = c
    double sigma2 = 0.0;  ///< Lambda''(beta)
};

/// Uniform large-deviation approximation of P(sum_{i<=n} log a_i > n (c + gamma_n)):
/// (beta sigma sqrt(2 pi n))^{-1} exp(-n (beta (c + gamma) - Lambda(beta) + gamma^2 / (2 sigma^2))).
/// Throws RangeError unless E log a < c < sup Lambda'.
LdApproximation ld_approx(const CoefficientLaw& law, long n, double c, double gamma_n = 0.0);

struct SummandMoments {
    double m2 = 1.0;
    double m3 = 0.0;  ///< E|X|^3
    double mr = 0.0;  ///< E|X|^r
};

/// (1 + |x|)^{-r} (m3 sigma^{-3} n^{-1/2} + mr sigma^{-r} n^{-(r-2)/2}) with the
/// unknown constant set to 1. Shape reference only.
double berry_esseen_reference(double r, double x, long n, const SummandMoments& moments);

/// sup_x |F_n(x) - Phi(x)| for the empirical CDF of `z` (sorted in place).
double kolmogorov_distance_to_normal(std::vector<double>& z);

}  // namespace tripert
