#include "tripert/estimation.hpp"

#include "tripert/errors.hpp"
#include "tripert/numeric.hpp"
#include "tripert/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tripert {

std::string to_string(Estimator e) { return e == Estimator::naive ? "naive" : "tilted_is"; }

TailCurve naive_tail(const std::vector<double>& samples, const std::vector<double>& t_grid) {
    if (samples.empty() || t_grid.empty()) throw EmptyGrid("naive_tail needs samples and a non-empty grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw ParameterError("t grid must be ascending");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    TailCurve curve;
    curve.estimator = Estimator::naive;
    for (double t : t_grid) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        const double p = static_cast<double>(above) / n;
        curve.t_grid.push_back(t);
        curve.p_hat.push_back(p);
        curve.se.push_back(above == 0 ? 3.0 / n : std::sqrt(p * (1.0 - p) / n));
        curve.ess.push_back(static_cast<double>(above));
    }
    return curve;
}

std::vector<double> log_grid(double tmin, double tmax, std::size_t points) {
    if (points == 0) throw EmptyGrid("grid needs at least one point");
    if (!(tmin > 0.0) || !(tmax >= tmin)) throw ParameterError("log grid needs 0 < tmin <= tmax");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = tmin;
        return g;
    }
    const double lo = std::log(tmin);
    const double step = (std::log(tmax) - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = std::exp(lo + step * static_cast<double>(i));
    g.front() = tmin;
    g.back() = tmax;
    return g;
}

namespace {

struct IsAcc {
    MeanAccumulator right, left, abs, weight;
    void merge(const IsAcc& o) {
        right.merge(o.right);
        left.merge(o.left);
        abs.merge(o.abs);
        weight.merge(o.weight);
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

}  // namespace

TailEstimate is_tail(const CoefficientLaw& law, const CramerReport& cramer, double t, const IsOptions& options) {
    if (options.n_reps == 0) throw ParameterError("is_tail needs at least one replica");
    WalkOptions walk;
    walk.plan = options.plan;
    walk.monitor = options.target;
    walk.trunc_tol = options.trunc_tol;
    walk.stop_scale = options.stop_scale;
    const BlockSampler sampler(law, cramer, make_geometry(cramer, t, options.D), walk);

    const std::uint64_t master = derive_seed(options.seed, stream_tag("is_tail"), options.stream);
    const std::uint64_t tag = stream_tag("replica");
    auto body = [&](std::size_t i, IsAcc& acc) {
        RandomStream rng = RandomStream::for_replica(master, tag, i);
        const BlockSample s = sampler.draw(rng);
        const double v = target_value(s, options.target);
        acc.right.add(v > t ? s.weight : 0.0);
        acc.left.add(v < -t ? s.weight : 0.0);
        acc.abs.add(std::abs(v) > t ? s.weight : 0.0);
        acc.weight.add(s.weight);
    };
    const IsAcc acc = parallel_reduce<IsAcc>(options.n_reps, options.workers, body);

    TailEstimate e;
    e.t = t;
    e.n_reps = options.n_reps;
    e.p_hat = acc.right.mean();
    e.se = acc.right.standard_error();
    e.p_left = acc.left.mean();
    e.se_left = acc.left.standard_error();
    e.p_abs = acc.abs.mean();
    e.se_abs = acc.abs.standard_error();
    e.ess = acc.right.effective_sample_size();
    e.ess_left = acc.left.effective_sample_size();
    e.weight_mean = acc.weight.mean();
    e.weight_se = acc.weight.standard_error();
    if (e.p_hat > 0.0 && e.ess < 100.0) {
        e.warnings.push_back("t = " + fmt(t) + ": effective sample size " + fmt(e.ess) + " < 100 (right tail)");
    }
    if (e.p_left > 0.0 && e.ess_left < 100.0) {
        e.warnings.push_back("t = " + fmt(t) + ": effective sample size " + fmt(e.ess_left) + " < 100 (left tail)");
    }
    return e;
}

CurvePair tail_curves(const CoefficientLaw& law, const CramerReport& cramer, const std::vector<double>& t_grid,
                      const IsOptions& options) {
    if (t_grid.empty()) throw EmptyGrid("tail curve needs a non-empty grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw ParameterError("t grid must be ascending");
    CurvePair out;
    const Estimator est = options.plan == TiltPlan::none ? Estimator::naive : Estimator::tilted_is;
    out.right.estimator = out.left.estimator = est;
    out.right.target = out.left.target = to_string(options.target.kind);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        IsOptions opt = options;
        opt.stream = options.stream + i;
        const TailEstimate e = is_tail(law, cramer, t_grid[i], opt);
        out.right.t_grid.push_back(e.t);
        out.right.p_hat.push_back(e.p_hat);
        out.right.se.push_back(e.se);
        out.right.ess.push_back(e.ess);
        out.left.t_grid.push_back(e.t);
        out.left.p_hat.push_back(e.p_left);
        out.left.se.push_back(e.se_left);
        out.left.ess.push_back(e.ess_left);
        out.points.push_back(e);
    }
    return out;
}

FitReport fit_exponents(const TailCurve& curve, std::optional<double> alpha_fixed) {
    std::vector<double> lt, llt, y, w;
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
        const double t = curve.t_grid[i];
        if (!(t > std::exp(std::numbers::e))) throw DomainError("fit grid must lie above e^e");
        const double p = curve.p_hat[i];
        const double se = curve.se[i];
        if (!(p > 0.0) || !(se > 0.0)) continue;
        lt.push_back(std::log(t));
        llt.push_back(std::log(lt.back()));
        y.push_back(std::log(p) + (alpha_fixed ? *alpha_fixed * lt.back() : 0.0));
        w.push_back((p / se) * (p / se));
    }
    const std::size_t n = y.size();
    const int k = alpha_fixed ? 2 : 3;
    if (n < 3) throw EmptyGrid("fit needs at least 3 grid points with positive estimates");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), k);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double sw = std::sqrt(w[i]);
        X(r, 0) = sw;
        if (alpha_fixed) {
            X(r, 1) = sw * llt[i];
        } else {
            X(r, 1) = -sw * lt[i];
            X(r, 2) = sw * llt[i];
        }
        Y(r) = sw * y[i];
    }

    // Conditioning of the column-normalized design.
    Eigen::MatrixXd Xn = X;
    for (int j = 0; j < k; ++j) Xn.col(j).normalize();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xn);
    const auto sv = svd.singularValues();
    const double cond = sv(0) / sv(k - 1);
    if (!std::isfinite(cond) || cond > 1e8) {
        throw SingularDesign("log log t column is numerically collinear over the grid (condition " + fmt(cond) +
                             "); widen the grid");
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::MatrixXd cov = (X.transpose() * X).inverse();
    const Eigen::VectorXd resid = Y - X * beta;

    FitReport rep;
    rep.alpha_fixed = alpha_fixed;
    rep.n_points = n;
    rep.logC_hat = beta(0);
    rep.C_hat = std::exp(beta(0));
    rep.se_logC = std::sqrt(cov(0, 0));
    if (alpha_fixed) {
        rep.alpha_hat = *alpha_fixed;
        rep.alphatilde_hat = beta(1);
        rep.se_alphatilde = std::sqrt(cov(1, 1));
    } else {
        rep.alpha_hat = beta(1);
        rep.alphatilde_hat = beta(2);
        rep.se_alpha = std::sqrt(cov(1, 1));
        rep.se_alphatilde = std::sqrt(cov(2, 2));
        rep.warnings.push_back("free (alpha, alphatilde) fit is ill-conditioned on realistic grids (condition " +
                               fmt(cond) + "); prefer alpha fixed at the Cramer root");
    }
    rep.covariance.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) rep.covariance[i][j] = cov(i, j);
    }
    rep.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    return rep;
}

NegligibilityReport negligibility_diag(const CoefficientLaw& law, const CramerReport& cramer, double t,
                                       const IsOptions& options) {
    NegligibilityReport rep;
    auto run = [&](Target target) {
        IsOptions opt = options;
        opt.target = TargetSpec{target};
        return is_tail(law, cramer, t, opt);
    };
    if (law.y_is_zero()) {
        rep.applicable = false;
        rep.ratio_left = rep.ratio_inf = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.middle = run(Target::m_t);
    rep.left = run(Target::n_t);
    rep.right = run(Target::n_inf);
    if (!(rep.middle.p_abs > 0.0)) {
        rep.applicable = false;
        rep.ratio_left = rep.ratio_inf = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.ratio_left = rep.left.p_abs / rep.middle.p_abs;
    rep.ratio_inf = rep.right.p_abs / rep.middle.p_abs;
    return rep;
}

ValueSe i_n_delta(const CoefficientLaw& law, const CramerReport& cramer, double t, double delta, double D,
                  std::size_t n_reps, std::uint64_t seed, unsigned workers) {
    if (!(delta > 1.0)) throw ParameterError("i_n_delta needs delta > 1");
    if (!(cramer.K.xx > 0.0)) {
        throw DegenerateError("K11 = 0: Y_n / sqrt(n) is degenerate; I(n, delta) has no Gaussian limit");
    }
    const BlockGeometry g = make_geometry(cramer, t, D);
    const long n = g.p;
    if (n < 1) throw DomainError("n = n0 - L - 1 < 1 at this t and D; use a smaller D");
    const TiltedLaw tilted = tilt(law, cramer.alpha);
    const double root = std::sqrt(static_cast<double>(n));
    const double log_t = std::log(t);
    const double alpha = cramer.alpha;
    const std::uint64_t master = derive_seed(seed, stream_tag("i_n_delta"), 0);

    auto body = [&](std::size_t i, MeanAccumulator& acc) {
        RandomStream rng = RandomStream::for_replica(master, 0, i);
        double y = 0.0;
        double log_pi = 0.0;
        for (long k = 0; k < n; ++k) {
            const CoefficientSample c = tilted.sample(rng);
            y += c.y;
            log_pi += std::log(c.a);
        }
        const bool inside = y > root / delta && y < delta * root && log_pi <= log_t;
        acc.add(inside ? std::pow(y / root, alpha) : 0.0);
    };
    const MeanAccumulator acc = parallel_reduce<MeanAccumulator>(n_reps, workers, body);
    return {acc.mean(), acc.standard_error()};
}

std::vector<ProjectionRow> projection_diag(const CoefficientLaw& law, const CramerReport& cramer,
                                           const PredictionReport& prediction, std::array<double, 2> v,
                                           const std::vector<double>& t_grid, const IsOptions& options) {
    if (!(v[0] > 0.0)) throw ParameterError("projection needs v1 > 0");
    IsOptions opt = options;
    opt.target = TargetSpec{Target::projection, v[0], v[1]};
    const CurvePair curves = tail_curves(law, cramer, t_grid, opt);
    std::vector<ProjectionRow> rows;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        ProjectionRow r;
        r.t = t_grid[i];
        r.p_hat = curves.right.p_hat[i];
        r.se = curves.right.se[i];
        const double lt = std::log(r.t);
        r.scaled = r.p_hat * std::pow(r.t, cramer.alpha) * std::pow(lt, -prediction.alphatilde);
        r.ratio = prediction.limit_right > 0.0 ? r.scaled / prediction.limit_right
                                               : std::numeric_limits<double>::quiet_NaN();
        r.v1 = v[0];
        r.v1_pow_alpha = std::pow(v[0], cramer.alpha);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace tripert
