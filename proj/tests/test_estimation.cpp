#include "tripert/errors.hpp"
#include "tripert/estimation.hpp"
#include "tripert/numeric.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tripert;

namespace {

CoefficientLaw cm1() { return CoefficientLaw(LogNormalA{-0.5, 0.5}, GaussianY{0, 1}, ConstantB{1}, ConstantB{1}); }

TailCurve synthetic(double C, double alpha, double alphatilde, double noise, std::uint64_t seed) {
    TailCurve c;
    c.t_grid = log_grid(1e3, 1e10, 12);
    RandomStream rng(seed);
    for (double t : c.t_grid) {
        const double p = C * std::pow(t, -alpha) * std::pow(std::log(t), alphatilde);
        c.p_hat.push_back(noise > 0.0 ? p * std::exp(noise * rng.normal()) : p);
        c.se.push_back(p * (noise > 0.0 ? noise : 0.01));
    }
    return c;
}

}  // namespace

TEST(Estimation, NaiveTailBasics) {
    const std::vector<double> s(10, 5.0);
    const TailCurve c = naive_tail(s, {4.0, 6.0});
    EXPECT_EQ(c.p_hat[0], 1.0);
    EXPECT_EQ(c.p_hat[1], 0.0);
    EXPECT_DOUBLE_EQ(c.se[1], 3.0 / 10.0);
    EXPECT_THROW(naive_tail({}, {1.0}), EmptyGrid);
    EXPECT_THROW(naive_tail(s, {}), EmptyGrid);
}

TEST(Estimation, NaiveTailParetoSlope) {
    RandomStream rng(31);
    std::vector<double> s;
    for (int i = 0; i < 2'000'000; ++i) s.push_back(std::pow(rng.uniform(), -0.5));  // P(X > t) = t^-2
    const TailCurve c = naive_tail(s, log_grid(20.0, 200.0, 10));
    for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
        const double truth = std::pow(c.t_grid[i], -2.0);
        EXPECT_NEAR(c.p_hat[i], truth, 4.0 * std::sqrt(truth / 2e6));
    }
    const FitReport f = fit_exponents(c);
    EXPECT_NEAR(f.alpha_hat, 2.0, 3.0 * f.se_alpha);
    EXPECT_FALSE(f.warnings.empty());
}

TEST(Estimation, LogGrid) {
    const auto g = log_grid(1e3, 1e10, 8);
    ASSERT_EQ(g.size(), 8u);
    EXPECT_EQ(g.front(), 1e3);
    EXPECT_EQ(g.back(), 1e10);
    EXPECT_NEAR(g[1], 1e4, 1e-6);
    EXPECT_THROW(log_grid(1, 10, 0), EmptyGrid);
    EXPECT_THROW(log_grid(10, 1, 3), ParameterError);
}

TEST(Estimation, FitExactRecovery) {
    const TailCurve c = synthetic(0.3, 2.0, 1.0, 0.0, 0);
    const FitReport fixed = fit_exponents(c, 2.0);
    EXPECT_NEAR(fixed.alphatilde_hat, 1.0, 1e-8);
    EXPECT_NEAR(fixed.C_hat, 0.3, 1e-8);
    const FitReport free = fit_exponents(c);
    EXPECT_NEAR(free.alpha_hat, 2.0, 1e-8);
    EXPECT_NEAR(free.alphatilde_hat, 1.0, 1e-7);
    EXPECT_NEAR(free.C_hat, 0.3, 1e-7);
}

TEST(Estimation, FitNoisyCoverage) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const FitReport f = fit_exponents(synthetic(0.3, 2.0, 1.0, 0.05, seed), 2.0);
        hits += std::abs(f.alphatilde_hat - 1.0) <= 0.2;
    }
    EXPECT_GE(hits, 190);
}

TEST(Estimation, FitErrors) {
    TailCurve c = synthetic(0.3, 2.0, 1.0, 0.0, 0);
    TailCurve two = c;
    two.t_grid.resize(2);
    two.p_hat.resize(2);
    two.se.resize(2);
    EXPECT_THROW(fit_exponents(two, 2.0), EmptyGrid);

    TailCurve flat;
    for (int i = 0; i < 5; ++i) {
        flat.t_grid.push_back(1e5);
        flat.p_hat.push_back(1e-9);
        flat.se.push_back(1e-10);
    }
    EXPECT_THROW(fit_exponents(flat, 2.0), SingularDesign);

    TailCurve low = c;
    low.t_grid[0] = 10.0;
    EXPECT_THROW(fit_exponents(low, 2.0), DomainError);
}

TEST(Estimation, IsAgreesWithNaive) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    const double t = 200.0;
    std::vector<double> x1;
    RandomStream rng(2);
    for (int i = 0; i < 200'000; ++i) x1.push_back(simulate_stationary(law, 1e-10, rng).x1);
    const TailCurve naive = naive_tail(x1, {t});

    IsOptions o;
    o.n_reps = 50'000;
    o.seed = 4;
    const TailEstimate e = is_tail(law, cr, t, o);
    EXPECT_NEAR(e.p_hat, naive.p_hat[0], 3.0 * std::hypot(e.se, naive.se[0]));

    std::vector<double> neg;
    for (double v : x1) neg.push_back(-v);
    const TailCurve naive_left = naive_tail(neg, {t});
    EXPECT_NEAR(e.p_left, naive_left.p_hat[0], 3.0 * std::hypot(e.se_left, naive_left.se[0]));
}

TEST(Estimation, FixedHorizonWeightCalibration) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    IsOptions o;
    o.plan = TiltPlan::fixed_horizon;
    o.D = 1.0;
    o.n_reps = 50'000;
    const TailEstimate e = is_tail(law, cr, 100.0, o);
    EXPECT_NEAR(e.weight_mean, 1.0, 3.0 * e.weight_se);
}

TEST(Estimation, ZeroYGivesZeroMiddleBlock) {
    const CoefficientLaw law(LogNormalA{-0.5, 0.5}, ConstantY{0}, ConstantB{1}, ConstantB{1});
    const CramerReport cr = analyze(law);
    IsOptions o;
    o.n_reps = 2'000;
    o.target = {Target::m_t};
    const TailEstimate e = is_tail(law, cr, 1e4, o);
    EXPECT_EQ(e.p_hat, 0.0);
    EXPECT_EQ(e.p_left, 0.0);
    const NegligibilityReport n = negligibility_diag(law, cr, 1e4, o);
    EXPECT_FALSE(n.applicable);
    EXPECT_TRUE(std::isnan(n.ratio_left));
}

TEST(Estimation, WorkerCountInvariance) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    IsOptions o;
    o.n_reps = 5'000;
    o.workers = 1;
    const TailEstimate a = is_tail(law, cr, 1e5, o);
    o.workers = 4;
    const TailEstimate b = is_tail(law, cr, 1e5, o);
    EXPECT_EQ(a.p_hat, b.p_hat);
    EXPECT_EQ(a.se, b.se);
    EXPECT_EQ(a.p_left, b.p_left);
}

TEST(Estimation, NegligibilityShrinksWithD) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    IsOptions o;
    o.n_reps = 20'000;
    o.seed = 3;
    o.D = 1.0;
    const NegligibilityReport small = negligibility_diag(law, cr, 1e6, o);
    o.D = 2.0;
    const NegligibilityReport large = negligibility_diag(law, cr, 1e6, o);
    ASSERT_TRUE(small.applicable);
    ASSERT_TRUE(large.applicable);
    EXPECT_LE(large.ratio_left, small.ratio_left);
    EXPECT_LE(large.ratio_inf, small.ratio_inf);
}

TEST(Estimation, INDeltaMonotoneAndDegenerate) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    const ValueSe a = i_n_delta(law, cr, 1e8, 2.0, 1.0, 20'000, 5);
    const ValueSe b = i_n_delta(law, cr, 1e8, 4.0, 1.0, 20'000, 5);
    EXPECT_LE(a.value, b.value);
    EXPECT_THROW(i_n_delta(law, cr, 1e8, 1.0, 1.0, 10, 5), ParameterError);

    const CoefficientLaw y1(LogNormalA{-0.5, 0.5}, ConstantY{1}, ConstantB{1}, ConstantB{1});
    EXPECT_THROW(i_n_delta(y1, analyze(y1), 1e8, 4.0, 1.0, 10, 5), DegenerateError);
}

TEST(Estimation, ProjectionIdentity) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    PredictionReport pred;
    pred.alphatilde = 1.0;
    pred.limit_right = 8.0;
    IsOptions o;
    o.n_reps = 3'000;
    const auto rows = projection_diag(law, cr, pred, {1.0, 0.0}, {1e4, 1e5}, o);
    const CurvePair direct = tail_curves(law, cr, {1e4, 1e5}, o);
    ASSERT_EQ(rows.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(rows[i].p_hat, direct.right.p_hat[i]);
        EXPECT_EQ(rows[i].v1_pow_alpha, 1.0);
    }
    EXPECT_THROW(projection_diag(law, cr, pred, {0.0, 1.0}, {1e4}, o), ParameterError);
}
