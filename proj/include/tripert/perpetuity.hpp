#pragma once

#include "tripert/cramer.hpp"
#include "tripert/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tripert {

/// Probabilistic size of the discarded remainder of the backward series.
///
/// For beta in (0, 1] with m = E a^beta < 1, subadditivity gives, given the
/// first n coefficients,
///   E|R|^beta <= Pi_n^beta [ (E|b1|^beta + E|b2|^beta + |Y_n|^beta E|b2|^beta) / (1 - m)
///                            + E(|y| a)^beta E|b2|^beta / (1 - m)^2 ].
/// The reported bound is that L^beta norm inflated by Markov's inequality so
/// that |R| exceeds it with probability at most `kExceedance`.
class SeriesTailBound {
public:
    static constexpr double kExceedance = 1e-6;

    explicit SeriesTailBound(const CoefficientLaw& law);

    double operator()(double pi, double abs_y) const;
    double beta() const noexcept { return beta_; }
    double contraction() const noexcept { return m_; }

private:
    double beta_ = 1.0;
    double m_ = 0.0;
    double const_part_ = 0.0;  // (E|b1|^b + E|b2|^b)/(1-m) + E(|y|a)^b E|b2|^b/(1-m)^2
    double y_part_ = 0.0;      // E|b2|^b / (1-m)
    double inflate_ = 1.0;
};

/// X = sum_n A_1 ... A_{n-1} B_n with X1 = X1' + X0.
struct StationaryPair {
    double x1 = 0.0;
    double x2 = 0.0;
    double x1_prime = 0.0;  ///< sum Pi_{n-1} b1_n
    double x0 = 0.0;        ///< sum Pi_{n-1} Y_{n-1} b2_n
    long truncation_n = 0;
    double truncation_bound = 0.0;
};

inline constexpr long kDefaultMaxSteps = 100'000;

/// Backward-series draw of the stationary vector, truncated at the first n
/// where the remainder bound drops below trunc_tol * (1 + |X1| + |X2|).
StationaryPair simulate_stationary(const CoefficientLaw& law, double trunc_tol, RandomStream& rng,
                                   long max_steps = kDefaultMaxSteps);

/// Forward iterates X_n = A_n X_{n-1} + B_n from X_0 = 0, after `burn_in`
/// discarded steps. Used only for trajectory output.
std::vector<std::pair<double, double>> forward_trace(const CoefficientLaw& law, std::size_t steps,
                                                     std::size_t burn_in, RandomStream& rng);

/// Block geometry around n0 = log t / rho with window L = D sqrt(log log t log t).
/// n0 and L are rounded to nearest; the left block ends at p = max(n0 - L - 1, 0)
/// and the middle block covers p+1 .. n0+L.
struct BlockGeometry {
    double t = 0.0;
    double D = 0.0;
    double n0_exact = 0.0;
    double L_exact = 0.0;
    long n0 = 0;
    long L = 0;
    long p = 0;
    long block_end = 0;
};

/// Throws DomainError for t <= e^e or D <= 0.
BlockGeometry make_geometry(const CramerReport& cramer, double t, double D);

enum class Target {
    x1,
    x2,
    x0,
    n_t,
    m_t,
    m_prime,
    m_double_prime,
    n_inf,
    r_t,
    projection,
};

struct TargetSpec {
    Target kind = Target::x1;
    double v1 = 1.0;  ///< projection only
    double v2 = 0.0;
};

std::string to_string(Target t);
Target parse_target(const std::string& name);

/// How the coefficient draws are tilted.
///
/// fixed_horizon: the first p = n0 - L - 1 draws come from the tilted law,
///   weight Pi_p^{-alpha}.
/// stopped: draws are tilted until the first k with Pi_k > t or
///   |partial sum of the monitored target| > t, then the base law resumes;
///   weight Pi_tau^{-alpha}. Any path on which the target exceeds t in
///   absolute value stops the tilt, so the estimator is unbiased for both
///   tails at once.
enum class TiltPlan { none, fixed_horizon, stopped };

struct WalkOptions {
    TiltPlan plan = TiltPlan::none;
    TargetSpec monitor{};
    double trunc_tol = 1e-12;
    long max_steps = kDefaultMaxSteps;
    /// Stopped plan: tilting also ends once Pi_{k-1} (1 + |Y_{k-1}|) * stop_scale > t,
    /// before a slow drift of the partial sum can cross t from a low product.
    /// Zero disables this early stop. 16 was the best of 1..1024 on the lognormal
    /// reference models (effective sample size 3-15x the plain stopping rule).
    double stop_scale = 16.0;
};

/// Every piece of the decomposition, computed from one shared trajectory.
struct BlockSample {
    double t = 0.0;
    long n0 = 0;
    long L = 0;
    double D = 0.0;
    long p = 0;          ///< last index of the left block
    long block_end = 0;  ///< n0 + L

    double n_t = 0.0;
    double m_t = 0.0;
    double n_inf = 0.0;
    double m_prime = 0.0;
    double m_double_prime = 0.0;
    double s_2L = 0.0;
    double r_t = 0.0;
    double r_prime = 0.0;
    double r_double_prime = 0.0;

    double x0 = 0.0;
    double x1 = 0.0;
    double x1_prime = 0.0;
    double x2 = 0.0;

    /// Sum of |terms| of m_t and r_t; the scale for exact-identity checks.
    double m_abs = 0.0;
    double r_abs = 0.0;
    double x0_abs = 0.0;

    double weight = 1.0;
    double log_weight = 0.0;
    long tilted_steps = 0;
    long truncation_n = 0;
    double truncation_bound = 0.0;
};

double target_value(const BlockSample& s, const TargetSpec& target);

/// Draws BlockSamples for one (law, t, D, plan). Holds the tilted law and the
/// remainder bound so that per-replica draws do no setup work.
class BlockSampler {
public:
    BlockSampler(const CoefficientLaw& law, const CramerReport& cramer, BlockGeometry geometry,
                 WalkOptions options, std::optional<TiltMode> tilt_mode = std::nullopt);

    BlockSample draw(RandomStream& rng) const;

    const BlockGeometry& geometry() const noexcept { return geometry_; }
    const WalkOptions& options() const noexcept { return options_; }

private:
    const CoefficientLaw* law_;
    std::optional<TiltedLaw> tilted_;  // built only when the plan tilts
    SeriesTailBound bound_;
    BlockGeometry geometry_;
    WalkOptions options_;
};

/// Convenience form: untilted, or fixed-horizon tilt of the first p draws.
BlockSample sample_blocks(const CoefficientLaw& law, const CramerReport& cramer, double t, double D,
                          bool tilt_first_n, RandomStream& rng);

/// Default window constant max(4, 2 (alpha + xi + 2) / rho).
double choose_D(const CramerReport& cramer, double xi);

}  // namespace tripert
