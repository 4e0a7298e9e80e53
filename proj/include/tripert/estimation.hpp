#pragma once

#include "tripert/asymptotics.hpp"
#include "tripert/cramer.hpp"
#include "tripert/perpetuity.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tripert {

enum class Estimator { naive, tilted_is };
std::string to_string(Estimator e);

struct TailCurve {
    std::vector<double> t_grid;
    std::vector<double> p_hat;
    std::vector<double> se;
    std::vector<double> ess;
    Estimator estimator = Estimator::naive;
    std::string target = "x1";
};

/// Empirical exceedance fractions with binomial standard errors. Points with
/// no exceedance report the rule-of-three bound 3/n as their se.
TailCurve naive_tail(const std::vector<double>& samples, const std::vector<double>& t_grid);

/// `points` logarithmically spaced values from tmin to tmax.
std::vector<double> log_grid(double tmin, double tmax, std::size_t points);

struct IsOptions {
    double D = 4.0;
    std::size_t n_reps = 100'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    TiltPlan plan = TiltPlan::stopped;
    TargetSpec target{};
    double trunc_tol = 1e-9;
    double stop_scale = 16.0;
    /// Distinguishes independent estimates sharing one seed (e.g. grid points).
    std::uint64_t stream = 0;
};

struct TailEstimate {
    double t = 0.0;
    double p_hat = 0.0;  ///< P(target > t)
    double se = 0.0;
    double p_left = 0.0;  ///< P(target < -t)
    double se_left = 0.0;
    double p_abs = 0.0;  ///< P(|target| > t)
    double se_abs = 0.0;
    double ess = 0.0;
    double ess_left = 0.0;
    double weight_mean = 0.0;
    double weight_se = 0.0;
    std::size_t n_reps = 0;
    std::vector<std::string> warnings;
};

/// Importance-sampled P(target > t) and P(target < -t) from one set of
/// replicas: mean of weight * indicator over tilted trajectories.
TailEstimate is_tail(const CoefficientLaw& law, const CramerReport& cramer, double t,
                     const IsOptions& options);

struct CurvePair {
    TailCurve right;
    TailCurve left;
    std::vector<TailEstimate> points;
};

/// is_tail at every grid point; point i uses stream options.stream + i.
CurvePair tail_curves(const CoefficientLaw& law, const CramerReport& cramer,
                      const std::vector<double>& t_grid, const IsOptions& options);

struct FitReport {
    std::optional<double> alpha_fixed;
    double alpha_hat = 0.0;
    double alphatilde_hat = 0.0;
    double logC_hat = 0.0;
    double C_hat = 0.0;
    /// Parameter order (logC, alphatilde) or (logC, alpha, alphatilde).
    std::vector<std::vector<double>> covariance;
    double se_logC = 0.0;
    double se_alphatilde = 0.0;
    double se_alpha = 0.0;
    double residual_rms = 0.0;
    std::size_t n_points = 0;
    std::vector<std::string> warnings;
};

/// Weighted least squares of log p = log C - alpha log t + alphatilde log log t
/// with weights (p / se)^2. Throws SingularDesign when the design is
/// numerically rank deficient over the grid.
FitReport fit_exponents(const TailCurve& curve, std::optional<double> alpha_fixed = std::nullopt);

struct NegligibilityReport {
    bool applicable = true;
    TailEstimate left;    ///< N_t
    TailEstimate middle;  ///< M_t
    TailEstimate right;   ///< N_{t,inf}
    double ratio_left = 0.0;
    double ratio_inf = 0.0;
};

/// P(|N_t| > t) / P(|M_t| > t) and P(|N_{t,inf}| > t) / P(|M_t| > t). All
/// three estimates share the seed. Not applicable when M_t vanishes (y == 0).
NegligibilityReport negligibility_diag(const CoefficientLaw& law, const CramerReport& cramer, double t,
                                       const IsOptions& options);

struct ValueSe {
    double value = 0.0;
    double se = 0.0;
};

/// E_alpha[(Y_n / sqrt n)^alpha 1{sqrt(n)/delta < Y_n < delta sqrt(n)} 1{Pi_n <= t}]
/// with n = n0 - L - 1 from the block geometry at window constant D.
ValueSe i_n_delta(const CoefficientLaw& law, const CramerReport& cramer, double t, double delta, double D,
                  std::size_t n_reps, std::uint64_t seed, unsigned workers = 1);

struct ProjectionRow {
    double t = 0.0;
    double p_hat = 0.0;
    double se = 0.0;
    double scaled = 0.0;  ///< p t^alpha (log t)^{-alphatilde}
    double ratio = 0.0;   ///< scaled / X1 limit
    double v1 = 0.0;
    double v1_pow_alpha = 0.0;
};

/// P(<v, X> > t) rescaled by the X1 normalization and divided by the X1 limit;
/// both candidate factors v1 and v1^alpha are reported alongside.
std::vector<ProjectionRow> projection_diag(const CoefficientLaw& law, const CramerReport& cramer,
                                           const PredictionReport& prediction, std::array<double, 2> v,
                                           const std::vector<double>& t_grid, const IsOptions& options);

}  // namespace tripert
