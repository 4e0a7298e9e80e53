#include "tripert/asymptotics.hpp"
#include "tripert/errors.hpp"
#include "tripert/numeric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace tripert;

namespace {

CoefficientLaw cm1() { return CoefficientLaw(LogNormalA{-0.5, 0.5}, GaussianY{0, 1}, ConstantB{1}, ConstantB{1}); }
CoefficientLaw cm2() { return CoefficientLaw(LogNormalA{-0.5, 0.5}, ConstantY{1}, ConstantB{1}, ConstantB{1}); }

// c+ of sum Pi_{n-1} for CM1 at alpha = 2: E[(aW + 1)^2 - (aW)^2] / (2 rho) = 2 E a E W + 1.
const double kExactCPlus = 1.0 + 2.0 * std::exp(-0.25) / (1.0 - std::exp(-0.25));

TailConstants constants(double cp, double cm) {
    TailConstants c;
    c.c_plus = cp;
    c.c_minus = cm;
    return c;
}

}  // namespace

TEST(Asymptotics, C0OfK) {
    EXPECT_NEAR(c0_of_K({1, 0, 0.5}, 2.0), 0.5, 1e-12);
    EXPECT_NEAR(c0_of_K({1, 0, 0.5}, 1.0), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(c0_of_K({4, 0, 0.5}, 2.0), 2.0, 1e-12);
    EXPECT_THROW(c0_of_K({0, 0, 0.5}, 2.0), DegenerateError);
}

TEST(Asymptotics, C0Truncated) {
    const SymMatrix2 K{1, 0, 0.5};
    EXPECT_EQ(c0_truncated(K, 2.0, 1.0), 0.0);
    EXPECT_EQ(c0_truncated(K, 2.0, 0.5), 0.0);
    EXPECT_NEAR(c0_truncated(K, 2.0, 1e3), c0_of_K(K, 2.0), 1e-8);
    // Integral of z^2 phi(z) is Phi(z) - z phi(z).
    auto F = [](double z) { return normal_cdf(z) - z * normal_pdf(z); };
    EXPECT_NEAR(c0_truncated(K, 2.0, 2.0), F(2.0) - F(0.5), 1e-12);
    EXPECT_LT(c0_truncated(K, 2.0, 2.0), c0_truncated(K, 2.0, 4.0));
}

TEST(Asymptotics, GoldieConstantCm1) {
    const CoefficientLaw law = cm1();
    const CramerReport cr = analyze(law);
    GoldieOptions o;
    o.n_samples = 200'000;
    const TailConstants c = goldie_constants(law, cr, o);
    EXPECT_NEAR(c.c_plus, kExactCPlus, 4.0 * c.se_plus);
    EXPECT_EQ(c.c_minus, 0.0);
    EXPECT_TRUE(std::isnan(c.c1_plus));
}

TEST(Asymptotics, GoldieSymmetricB) {
    const CoefficientLaw law(LogNormalA{-0.5, 0.5}, GaussianY{0, 1}, ConstantB{1}, GaussianB{0, 1});
    const CramerReport cr = analyze(law);
    GoldieOptions o;
    o.n_samples = 200'000;
    const TailConstants c = goldie_constants(law, cr, o);
    EXPECT_NEAR(c.c_plus, c.c_minus, 4.0 * std::hypot(c.se_plus, c.se_minus));
    EXPECT_GT(c.c_plus, 0.0);
}

TEST(Asymptotics, GoldieDecoupledGivesX1Constants) {
    const CoefficientLaw law(LogNormalA{-0.5, 0.5}, ConstantY{0}, ConstantB{2}, ConstantB{1});
    const CramerReport cr = analyze(law);
    GoldieOptions o;
    o.n_samples = 100'000;
    const TailConstants c = goldie_constants(law, cr, o);
    ASSERT_FALSE(std::isnan(c.c1_plus));
    // X1 = 2 X2 when y == 0 and b1 == 2 b2: c1+ = 2^alpha c+.
    EXPECT_NEAR(c.c1_plus, 4.0 * kExactCPlus, 4.0 * c.se1_plus + 4.0 * 4.0 * c.se_plus);
    EXPECT_EQ(decide_regime(cr), Regime::decoupled);
}

TEST(Asymptotics, PositivityCriterion) {
    const CoefficientLaw law = cm1();
    EXPECT_TRUE(tail_constant_positive(law, 1.0));
    EXPECT_FALSE(tail_constant_positive(law, -1.0));
    // a < 1 always: no positive constant at all.
    const CoefficientLaw small(DiscreteA{{0.3, 0.6}, {0.5, 0.5}}, ConstantY{0}, ConstantB{0}, ConstantB{1});
    EXPECT_FALSE(tail_constant_positive(small, 1.0));
}

TEST(Asymptotics, PredictedLimitsCentered) {
    const CramerReport cr = analyze(cm1());
    EXPECT_EQ(decide_regime(cr), Regime::centered);
    const PredictionReport p = predicted_limits(cr, constants(8.0, 0.0));
    EXPECT_EQ(p.regime, Regime::centered);
    EXPECT_DOUBLE_EQ(p.alphatilde, 1.0);
    EXPECT_NEAR(p.literal_right, 0.25 * 8.0, 1e-12);
    EXPECT_NEAR(p.literal_left, 0.25 * 8.0, 1e-12);
    // rho^{-alpha/2} c0 = 2 * 0.5.
    EXPECT_NEAR(p.limit_right, 8.0, 1e-12);
    EXPECT_NEAR(p.limit_left, 8.0, 1e-12);
    EXPECT_NEAR(p.x2_right, 8.0, 0.0);
}

TEST(Asymptotics, PredictedLimitsNoncentered) {
    const CramerReport cr = analyze(cm2());
    EXPECT_EQ(decide_regime(cr), Regime::noncentered);
    const PredictionReport p = predicted_limits(cr, constants(8.0, 0.0));
    EXPECT_DOUBLE_EQ(p.alphatilde, 2.0);
    EXPECT_NEAR(p.literal_right, 0.25 * 8.0, 1e-12);
    EXPECT_NEAR(p.limit_right, 4.0 * 8.0, 1e-12);
    EXPECT_EQ(p.limit_left, 0.0);
    EXPECT_EQ(p.literal_left, 0.0);

    const CoefficientLaw mirror(LogNormalA{-0.5, 0.5}, ConstantY{-1}, ConstantB{1}, ConstantB{1});
    const PredictionReport q = predicted_limits(analyze(mirror), constants(8.0, 0.0));
    EXPECT_EQ(q.limit_right, 0.0);
    EXPECT_NEAR(q.limit_left, p.limit_right, 1e-12);
}

TEST(Asymptotics, LdApproxLogNormalOracle) {
    const double mu = -0.5, s2 = 0.5;
    const CoefficientLaw law(LogNormalA{mu, s2}, ConstantY{0}, ConstantB{1}, ConstantB{1});
    const long n = 100;
    for (double c : {mu + 0.25, mu + s2, mu + 1.0, mu + 2.0}) {
        const double truth = normal_sf(n * (c - mu) / std::sqrt(n * s2));
        const LdApproximation ld = ld_approx(law, n, c);
        EXPECT_GT(ld.value / truth, 0.85) << c;
        EXPECT_LT(ld.value / truth, 1.15) << c;
        EXPECT_NEAR(ld.tilt, (c - mu) / s2, 1e-8);
        EXPECT_NEAR(ld.sigma2, s2, 1e-8);
    }
    EXPECT_LT(ld_approx(law, 200, mu + s2).value, ld_approx(law, 100, mu + s2).value);
    EXPECT_THROW(ld_approx(law, n, mu - 0.1), RangeError);
}

TEST(Asymptotics, LdApproxGammaReducesToRate) {
    const CoefficientLaw law(LogNormalA{-0.5, 0.5}, ConstantY{0}, ConstantB{1}, ConstantB{1});
    const LdApproximation a = ld_approx(law, 50, 0.0, 0.0);
    const double beta = a.tilt;
    const double lambda = -0.5 * beta + 0.25 * beta * beta;
    const double expected =
        std::exp(-50.0 * (beta * 0.0 - lambda)) / (beta * std::sqrt(a.sigma2) * std::sqrt(2 * std::numbers::pi * 50));
    EXPECT_NEAR(a.value / expected, 1.0, 1e-10);
}

TEST(Asymptotics, BerryEsseenShape) {
    const SummandMoments m{1.0, 2.0, 3.0};
    const double f1 = berry_esseen_reference(3.0, 0.0, 100, {1.0, 2.0, 0.0});
    const double f4 = berry_esseen_reference(3.0, 0.0, 400, {1.0, 2.0, 0.0});
    EXPECT_NEAR(f4 / f1, 0.5, 1e-12);
    // r = 3: both terms are n^{-1/2}.
    EXPECT_NEAR(berry_esseen_reference(3.0, 0.0, 100, {1.0, 2.0, 2.0}) /
                    berry_esseen_reference(3.0, 0.0, 400, {1.0, 2.0, 2.0}),
                2.0, 1e-12);
    EXPECT_LT(berry_esseen_reference(4.0, 3.0, 100, m), berry_esseen_reference(4.0, 0.0, 100, m));
    EXPECT_THROW(berry_esseen_reference(2.5, 0.0, 100, m), ParameterError);
}

TEST(Asymptotics, KolmogorovGaussianSums) {
    RandomStream rng(6);
    std::vector<double> z;
    for (int i = 0; i < 20'000; ++i) {
        double s = 0.0;
        for (int k = 0; k < 10; ++k) s += rng.normal();
        z.push_back(s / std::sqrt(10.0));
    }
    // The 1% Kolmogorov critical value is about 1.63 / sqrt(n).
    EXPECT_LT(kolmogorov_distance_to_normal(z), 1.63 / std::sqrt(20'000.0));
}
