#include "tripert/model.hpp"

#include "tripert/errors.hpp"
#include "tripert/numeric.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace tripert {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

void validate(const AFamily& a) {
    std::visit(Overloaded{
                   [](const LogNormalA& f) {
                       require(std::isfinite(f.mu), "a.mu must be finite");
                       require(f.sigma2 > 0.0 && std::isfinite(f.sigma2), "a.sigma2 must be > 0");
                   },
                   [](const ConstantA& f) { require(f.c > 0.0 && std::isfinite(f.c), "a.c must be > 0"); },
                   [](const DiscreteA& f) {
                       require(!f.values.empty(), "discrete a needs at least one value");
                       require(f.values.size() == f.probs.size(), "a.values and a.probs differ in length");
                       double total = 0.0;
                       for (std::size_t i = 0; i < f.values.size(); ++i) {
                           require(f.values[i] > 0.0 && std::isfinite(f.values[i]), "discrete a values must be > 0");
                           require(f.probs[i] > 0.0, "discrete a probabilities must be > 0");
                           total += f.probs[i];
                       }
                       require(std::abs(total - 1.0) < 1e-9, "discrete a probabilities must sum to 1");
                   },
                   [](const ShiftedSquareA& f) {
                       require(f.lambda >= 0.0 && f.shift >= 0.0, "shifted-square a needs lambda, shift >= 0");
                       require(f.lambda > 0.0 || f.shift > 0.0, "shifted-square a must not be identically 0");
                   },
                   [](const CustomA& f) {
                       require(static_cast<bool>(f.sampler), "custom a family needs a sampler");
                       require(f.beta_lo < 0.0 && f.beta_hi > 0.0, "custom a domain must contain 0");
                       require(f.mc_samples >= 2, "custom a needs at least two Monte Carlo samples");
                   },
               },
               a);
}

void validate(const YFamily& y) {
    std::visit(Overloaded{
                   [](const ConstantY& f) { require(std::isfinite(f.c), "y.c must be finite"); },
                   [](const GaussianY& f) {
                       require(std::isfinite(f.mean) && f.var >= 0.0 && std::isfinite(f.var),
                               "y gaussian needs finite mean and var >= 0");
                   },
                   [](const AffineInLogA& f) {
                       require(std::isfinite(f.lambda) && std::isfinite(f.offset),
                               "y affine-in-log-a needs finite lambda and offset");
                   },
               },
               y);
}

void validate(const BFamily& b, const char* name) {
    std::visit(Overloaded{
                   [&](const ConstantB& f) { require(std::isfinite(f.c), std::string(name) + ".c must be finite"); },
                   [&](const GaussianB& f) {
                       require(std::isfinite(f.mean) && f.var >= 0.0 && std::isfinite(f.var),
                               std::string(name) + " gaussian needs finite mean and var >= 0");
                   },
                   [&](const ExponentialB& f) {
                       require(f.rate > 0.0 && std::isfinite(f.rate), std::string(name) + ".rate must be > 0");
                   },
               },
               b);
}

double draw_b(const BFamily& b, RandomStream& rng) {
    return std::visit(Overloaded{
                          [](const ConstantB& f) { return f.c; },
                          [&](const GaussianB& f) { return rng.normal(f.mean, std::sqrt(f.var)); },
                          [&](const ExponentialB& f) { return rng.exponential(f.rate); },
                      },
                      b);
}

double abs_moment(const BFamily& b, double p) {
    return std::visit(Overloaded{
                          [&](const ConstantB& f) { return std::pow(std::abs(f.c), p); },
                          [&](const GaussianB& f) { return gaussian_abs_moment(f.mean, f.var, p); },
                          [&](const ExponentialB& f) {
                              return boost::math::tgamma(1.0 + p) / std::pow(f.rate, p);
                          },
                      },
                      b);
}

double mean_of(const BFamily& b) {
    return std::visit(Overloaded{
                          [](const ConstantB& f) { return f.c; },
                          [](const GaussianB& f) { return f.mean; },
                          [](const ExponentialB& f) { return 1.0 / f.rate; },
                      },
                      b);
}

std::string describe_b(const BFamily& b) {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const ConstantB& f) { os << "Constant(" << f.c << ")"; },
                   [&](const GaussianB& f) { os << "Gaussian(" << f.mean << ", " << f.var << ")"; },
                   [&](const ExponentialB& f) { os << "Exponential(" << f.rate << ")"; },
               },
               b);
    return os.str();
}

}  // namespace

CoefficientLaw::CoefficientLaw(AFamily a, YFamily y, BFamily b1, BFamily b2, bool symmetrize_b)
    : a_(std::move(a)), y_(std::move(y)), b1_(std::move(b1)), b2_(std::move(b2)),
      symmetrize_b_(symmetrize_b) {
    validate(a_);
    validate(y_);
    validate(b1_, "b1");
    validate(b2_, "b2");
    if (const auto* custom = std::get_if<CustomA>(&a_)) {
        auto pool = std::make_shared<std::vector<double>>();
        pool->reserve(custom->mc_samples);
        RandomStream rng(custom->mc_seed);
        for (std::size_t i = 0; i < custom->mc_samples; ++i) {
            const double a_draw = custom->sampler(rng);
            require(a_draw > 0.0 && std::isfinite(a_draw), "custom a sampler emitted a <= 0");
            pool->push_back(a_draw);
        }
        mc_pool_ = std::move(pool);
    }
}

double CoefficientLaw::sample_a(RandomStream& rng) const {
    return std::visit(Overloaded{
                          [&](const LogNormalA& f) { return std::exp(rng.normal(f.mu, std::sqrt(f.sigma2))); },
                          [](const ConstantA& f) { return f.c; },
                          [&](const DiscreteA& f) {
                              double u = rng.uniform();
                              for (std::size_t i = 0; i + 1 < f.values.size(); ++i) {
                                  if (u < f.probs[i]) return f.values[i];
                                  u -= f.probs[i];
                              }
                              return f.values.back();
                          },
                          [&](const ShiftedSquareA& f) {
                              const double z = rng.normal();
                              return f.lambda * z * z + f.shift;
                          },
                          [&](const CustomA& f) {
                              const double a = f.sampler(rng);
                              if (!(a > 0.0) || !std::isfinite(a)) {
                                  throw ParameterError("custom a sampler emitted a <= 0");
                              }
                              return a;
                          },
                      },
                      a_);
}

double CoefficientLaw::sample_y(double a, RandomStream& rng) const {
    return std::visit(Overloaded{
                          [](const ConstantY& f) { return f.c; },
                          [&](const GaussianY& f) { return rng.normal(f.mean, std::sqrt(f.var)); },
                          [&](const AffineInLogA& f) { return f.lambda * (std::log(a) - f.offset); },
                      },
                      y_);
}

std::pair<double, double> CoefficientLaw::sample_b(RandomStream& rng) const {
    double b1 = draw_b(b1_, rng);
    double b2 = draw_b(b2_, rng);
    if (symmetrize_b_) {
        const double sign = rng.sign();
        b1 *= sign;
        b2 *= sign;
    }
    return {b1, b2};
}

CoefficientSample CoefficientLaw::complete(double a, RandomStream& rng) const {
    CoefficientSample s;
    s.a = a;
    s.y = sample_y(a, rng);
    std::tie(s.b1, s.b2) = sample_b(rng);
    return s;
}

CoefficientSample CoefficientLaw::sample(RandomStream& rng) const {
    const double a = sample_a(rng);
    return complete(a, rng);
}

std::pair<double, double> CoefficientLaw::mellin_domain() const {
    return std::visit(Overloaded{
                          [](const ShiftedSquareA& f) {
                              // With shift == 0, E (lambda Z^2)^beta needs beta > -1/2.
                              return f.shift > 0.0 ? std::pair{-kInf, kInf} : std::pair{-0.5, kInf};
                          },
                          [](const CustomA& f) { return std::pair{f.beta_lo, f.beta_hi}; },
                          [](const auto&) { return std::pair{-kInf, kInf}; },
                      },
                      a_);
}

bool CoefficientLaw::in_mellin_domain(double beta) const {
    const auto [lo, hi] = mellin_domain();
    return beta > lo && beta < hi;
}

Moment CoefficientLaw::custom_expect(double beta, const std::function<double(double)>& g) const {
    MeanAccumulator acc;
    for (double a : *mc_pool_) acc.add(std::pow(a, beta) * g(std::log(a)));
    return {acc.mean(), acc.standard_error()};
}

Moment CoefficientLaw::expect_a(double beta, const std::function<double(double)>& g) const {
    if (!in_mellin_domain(beta)) {
        std::ostringstream os;
        os << "beta = " << beta << " outside the finiteness domain of E a^beta";
        throw DomainError(os.str());
    }
    return std::visit(
        Overloaded{
            [&](const LogNormalA& f) {
                const double m = std::exp(f.mu * beta + 0.5 * f.sigma2 * beta * beta);
                return Moment{m * gaussian_expectation(g, f.mu + beta * f.sigma2, std::sqrt(f.sigma2)), 0.0};
            },
            [&](const ConstantA& f) { return Moment{std::pow(f.c, beta) * g(std::log(f.c)), 0.0}; },
            [&](const DiscreteA& f) {
                CompensatedSum sum;
                for (std::size_t i = 0; i < f.values.size(); ++i) {
                    sum.add(f.probs[i] * std::pow(f.values[i], beta) * g(std::log(f.values[i])));
                }
                return Moment{sum.value(), 0.0};
            },
            [&](const ShiftedSquareA& f) {
                if (f.lambda == 0.0) return Moment{std::pow(f.shift, beta) * g(std::log(f.shift)), 0.0};
                auto integrand = [&](double z) {
                    const double a = f.lambda * z * z + f.shift;
                    return std::pow(a, beta) * g(std::log(a)) * normal_pdf(z);
                };
                return Moment{2.0 * integrate(integrand, 0.0, kInf), 0.0};
            },
            [&](const CustomA&) { return custom_expect(beta, g); },
        },
        a_);
}

bool CoefficientLaw::a_is_degenerate() const {
    return std::visit(Overloaded{
                          [](const ConstantA&) { return true; },
                          [](const DiscreteA& f) { return f.values.size() == 1; },
                          [](const ShiftedSquareA& f) { return f.lambda == 0.0; },
                          [](const auto&) { return false; },
                      },
                      a_);
}

bool CoefficientLaw::y_depends_on_a() const noexcept {
    return std::holds_alternative<AffineInLogA>(y_);
}

bool CoefficientLaw::y_is_zero() const noexcept {
    return std::visit(Overloaded{
                          [](const ConstantY& f) { return f.c == 0.0; },
                          [](const GaussianY& f) { return f.mean == 0.0 && f.var == 0.0; },
                          [](const AffineInLogA& f) { return f.lambda == 0.0; },
                      },
                      y_);
}

bool CoefficientLaw::non_arithmetic() const noexcept {
    return std::visit(Overloaded{
                          [](const LogNormalA&) { return true; },
                          [](const ConstantA&) { return false; },
                          [](const DiscreteA&) { return false; },
                          [](const ShiftedSquareA& f) { return f.lambda > 0.0; },
                          [](const CustomA& f) { return f.non_arithmetic; },
                      },
                      a_);
}

double CoefficientLaw::b_abs_moment(int component, double p) const {
    return abs_moment(component == 1 ? b1_ : b2_, p);
}

double CoefficientLaw::b_mean(int component) const {
    return symmetrize_b_ ? 0.0 : mean_of(component == 1 ? b1_ : b2_);
}

double CoefficientLaw::y_abs_moment(double p) const {
    return std::visit(Overloaded{
                          [&](const ConstantY& f) { return std::pow(std::abs(f.c), p); },
                          [&](const GaussianY& f) { return gaussian_abs_moment(f.mean, f.var, p); },
                          [&](const AffineInLogA& f) {
                              const double off = f.offset;
                              const Moment m = expect_a(0.0, [&](double x) { return std::pow(std::abs(x - off), p); });
                              return std::pow(std::abs(f.lambda), p) * m.value;
                          },
                      },
                      y_);
}

std::string CoefficientLaw::describe() const {
    std::ostringstream os;
    os << "a ~ ";
    std::visit(Overloaded{
                   [&](const LogNormalA& f) { os << "LogNormal(mu=" << f.mu << ", sigma2=" << f.sigma2 << ")"; },
                   [&](const ConstantA& f) { os << "Constant(" << f.c << ")"; },
                   [&](const DiscreteA& f) {
                       os << "Discrete{";
                       for (std::size_t i = 0; i < f.values.size(); ++i) {
                           os << (i ? ", " : "") << f.values[i] << ":" << f.probs[i];
                       }
                       os << "}";
                   },
                   [&](const ShiftedSquareA& f) { os << f.lambda << "*Z^2 + " << f.shift; },
                   [&](const CustomA& f) { os << "Custom(" << f.name << ")"; },
               },
               a_);
    os << "; y ~ ";
    std::visit(Overloaded{
                   [&](const ConstantY& f) { os << "Constant(" << f.c << ")"; },
                   [&](const GaussianY& f) { os << "Gaussian(" << f.mean << ", " << f.var << ")"; },
                   [&](const AffineInLogA& f) { os << f.lambda << "*(log a - " << f.offset << ")"; },
               },
               y_);
    os << "; b1 ~ " << describe_b(b1_) << "; b2 ~ " << describe_b(b2_);
    if (symmetrize_b_) os << "; b symmetrized";
    return os.str();
}

Moment mellin(const CoefficientLaw& law, double beta) {
    if (!law.in_mellin_domain(beta)) {
        std::ostringstream os;
        os << "beta = " << beta << " outside the finiteness domain of E a^beta";
        throw DomainError(os.str());
    }
    if (beta == 0.0) return {1.0, 0.0};
    const auto& a = law.a_family();
    if (const auto* f = std::get_if<LogNormalA>(&a)) {
        return {std::exp(f->mu * beta + 0.5 * f->sigma2 * beta * beta), 0.0};
    }
    if (const auto* f = std::get_if<CustomA>(&a); f != nullptr && f->mellin) {
        return {f->mellin(beta), 0.0};
    }
    return law.expect_a(beta, [](double) { return 1.0; });
}

Moment mellin_log(const CoefficientLaw& law, double beta) {
    if (const auto* f = std::get_if<LogNormalA>(&law.a_family())) {
        const Moment m = mellin(law, beta);
        return {(f->mu + beta * f->sigma2) * m.value, 0.0};
    }
    return law.expect_a(beta, [](double x) { return x; });
}

Moment mellin_log2(const CoefficientLaw& law, double beta) {
    if (const auto* f = std::get_if<LogNormalA>(&law.a_family())) {
        const Moment m = mellin(law, beta);
        const double shift = f->mu + beta * f->sigma2;
        return {(shift * shift + f->sigma2) * m.value, 0.0};
    }
    return law.expect_a(beta, [](double x) { return x * x; });
}

CrossMoments cross_moments(const CoefficientLaw& law, double alpha, double r) {
    const Moment m = mellin(law, alpha);
    return std::visit(
        Overloaded{
            [&](const ConstantY& f) {
                return CrossMoments{{f.c * m.value, std::abs(f.c) * m.se},
                                    {std::pow(std::abs(f.c), r) * m.value, std::pow(std::abs(f.c), r) * m.se}};
            },
            [&](const GaussianY& f) {
                const double abs_y = gaussian_abs_moment(f.mean, f.var, r);
                return CrossMoments{{f.mean * m.value, std::abs(f.mean) * m.se},
                                    {abs_y * m.value, abs_y * m.se}};
            },
            [&](const AffineInLogA& f) {
                const double off = f.offset;
                const Moment s = law.expect_a(alpha, [off](double x) { return x - off; });
                const Moment abs_r = law.expect_a(alpha, [&](double x) { return std::pow(std::abs(x - off), r); });
                const double scale = std::pow(std::abs(f.lambda), r);
                return CrossMoments{{f.lambda * s.value, std::abs(f.lambda) * s.se},
                                    {scale * abs_r.value, scale * abs_r.se}};
            },
        },
        law.y_family());
}

CoefficientLaw garch_preset(double omega1, double omega2, double lam, double beta_coef,
                            double coupling) {
    require(lam >= 0.0, "garch: lambda must be >= 0");
    require(beta_coef >= 0.0, "garch: beta_coef must be >= 0");
    require(omega1 > 0.0 && omega2 > 0.0, "garch: omega1, omega2 must be > 0");
    require(lam > 0.0 || beta_coef > 0.0, "garch: lambda and beta_coef cannot both be 0");
    AFamily a = lam == 0.0 ? AFamily{ConstantA{beta_coef}} : AFamily{ShiftedSquareA{lam, beta_coef}};
    return CoefficientLaw(std::move(a), ConstantY{coupling}, ConstantB{omega1}, ConstantB{omega2});
}

}  // namespace tripert
