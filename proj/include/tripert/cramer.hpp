#pragma once

#include "tripert/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tripert {

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct SymMatrix2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const noexcept { return xx * yy - xy * xy; }
    double min_eigenvalue() const noexcept;
};

struct AssumptionFlag {
    std::string name;
    bool passed = true;
    /// Non-fatal flags (the declared non-arithmetic property) only warn.
    bool fatal = true;
    std::string detail;
};

/// Spectral quantities of a coefficient law at its Cramer root.
struct CramerReport {
    double alpha = 0.0;
    double root_residual = 0.0;  ///< log E a^alpha
    double rho = 0.0;            ///< E a^alpha log a
    double s = 0.0;              ///< E y a^alpha
    double s_se = 0.0;
    double mean_log_a = 0.0;
    double epsilon0 = 0.0;
    double r = 0.0;
    double abs_r_moment = 0.0;  ///< E |y|^r a^alpha
    /// Covariance of (y, log a - rho) under the tilted measure.
    SymMatrix2 K;
    double detK = 0.0;
    std::vector<AssumptionFlag> flags;
    std::vector<std::string> warnings;

    const AssumptionFlag* flag(const std::string& name) const;
};

/// Positive root of Lambda(beta) = log E a^beta, by doubling from beta = 1
/// until Lambda > 0 and then TOMS 748 on the bracket.
/// Throws DriftError if E log a >= 0 and NoRootError if Lambda stays
/// non-positive on the finiteness domain.
double solve_alpha(const CoefficientLaw& law, double tol = 1e-12);

/// Assemble rho, s, K, epsilon0 and the assumption flags at a given root.
/// Throws AssumptionError naming the first failed fatal assumption.
CramerReport spectral_report(const CoefficientLaw& law, double alpha, double r);

/// Default moment order: max(3, 2 alpha + 2).
double default_moment_order(double alpha);

/// solve_alpha followed by spectral_report.
CramerReport analyze(const CoefficientLaw& law, std::optional<double> r = std::nullopt,
                     double tol = 1e-12);

/// True iff no constant x satisfies a x + b2 = x almost surely.
bool check_fixed_point(const CoefficientLaw& law, std::size_t n_samples = 10'000,
                       std::uint64_t seed = 0xF1EDu);

enum class TiltMode { analytic, rejection };

/// Sampler for the coefficient law reweighted by a^alpha.
///
/// Analytic mode uses an exact family-specific sampler (shifted Gaussian for
/// log-normal a, reweighted atoms for discrete a, a Gaussian-proposal
/// accept/reject for the shifted-square family). Rejection mode draws from
/// the base law and accepts with probability a^alpha / envelope_bound.
class TiltedLaw {
public:
    TiltedLaw(const CoefficientLaw& base, double alpha, TiltMode mode);

    const CoefficientLaw& base() const noexcept { return *base_; }
    double alpha() const noexcept { return alpha_; }
    TiltMode mode() const noexcept { return mode_; }
    double envelope_bound() const noexcept { return envelope_; }

    CoefficientSample sample(RandomStream& rng) const;
    double sample_a(RandomStream& rng) const;

private:
    const CoefficientLaw* base_;
    double alpha_;
    TiltMode mode_;
    double envelope_ = 0.0;
    // Discrete family: tilted probabilities.
    std::vector<double> probs_;
    // Shifted-square family: proposal variance and log of the envelope.
    double proposal_var_ = 1.0;
    double log_envelope_ = 0.0;
};

/// Build the tilted law. Analytic is preferred whenever the family has one;
/// requesting rejection for a family with unbounded a^alpha throws
/// UnboundedEnvelopeError. The base law must outlive the returned object.
TiltedLaw tilt(const CoefficientLaw& law, double alpha,
               std::optional<TiltMode> requested = std::nullopt);

}  // namespace tripert
