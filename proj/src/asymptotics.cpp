#include "tripert/asymptotics.hpp"

#include "tripert/errors.hpp"
#include "tripert/numeric.hpp"
#include "tripert/parallel.hpp"
#include "tripert/perpetuity.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tripert {

double c0_of_K(const SymMatrix2& K, double alpha) {
    if (!(alpha > 0.0)) throw ParameterError("c0 needs alpha > 0");
    if (!(K.xx > 0.0)) {
        throw DegenerateError("K11 = 0: Y_n / sqrt(n) has no Gaussian limit; use the non-centered analysis");
    }
    const double g = std::pow(2.0, 0.5 * alpha - 1.0) * boost::math::tgamma(0.5 * (alpha + 1.0)) /
                     std::sqrt(std::numbers::pi);
    return std::pow(K.xx, 0.5 * alpha) * g;
}

double c0_truncated(const SymMatrix2& K, double alpha, double delta) {
    if (!(alpha > 0.0)) throw ParameterError("c0 needs alpha > 0");
    if (!(K.xx > 0.0)) {
        throw DegenerateError("K11 = 0: Y_n / sqrt(n) has no Gaussian limit; use the non-centered analysis");
    }
    if (!(delta > 1.0)) return 0.0;
    const double sd = std::sqrt(K.xx);
    const double lo = 1.0 / delta;
    // Beyond 40 sd the Gaussian weight is below 1e-340.
    const double hi = std::min(delta, 40.0 * sd + lo);
    if (hi <= lo) return 0.0;
    auto f = [&](double z) { return std::pow(z, alpha) * normal_pdf(z / sd) / sd; };
    return integrate(f, lo, hi, 1e-13);
}

namespace {

double pos_pow(double x, double alpha) { return x > 0.0 ? std::pow(x, alpha) : 0.0; }

struct GoldieAcc {
    MeanAccumulator plus, minus, plus1, minus1;
    void merge(const GoldieAcc& o) {
        plus.merge(o.plus);
        minus.merge(o.minus);
        plus1.merge(o.plus1);
        minus1.merge(o.minus1);
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

bool tail_constant_positive(const CoefficientLaw& law, double sign, std::size_t n_samples, std::uint64_t seed) {
    RandomStream rng(seed);
    double min_above = std::numeric_limits<double>::infinity();
    double max_below = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_samples; ++i) {
        const CoefficientSample c = law.sample(rng);
        const double v = sign * c.b2;
        if (c.a == 1.0) {
            if (v > 0.0) return true;
            continue;
        }
        const double ratio = v / (1.0 - c.a);
        if (c.a > 1.0) min_above = std::min(min_above, ratio);
        else max_below = std::max(max_below, ratio);
    }
    return min_above < max_below;
}

TailConstants goldie_constants(const CoefficientLaw& law, const CramerReport& cramer,
                               const GoldieOptions& options) {
    const double alpha = cramer.alpha;
    const bool with_b1 = law.y_is_zero();
    const std::uint64_t tag = stream_tag("goldie");
    const auto clip = options.clip;

    auto body = [&](std::size_t i, GoldieAcc& acc) {
        RandomStream rng = RandomStream::for_replica(options.seed, tag, i);
        const StationaryPair w = simulate_stationary(law, options.trunc_tol, rng);
        const CoefficientSample c = law.sample(rng);
        auto term = [&](double aw, double b, double sgn) {
            double v = pos_pow(sgn * (aw + b), alpha) - pos_pow(sgn * aw, alpha);
            if (clip) v = std::clamp(v, -*clip, *clip);
            return v;
        };
        const double aw2 = c.a * w.x2;
        acc.plus.add(term(aw2, c.b2, 1.0));
        acc.minus.add(term(aw2, c.b2, -1.0));
        if (with_b1) {
            // With y == 0, X1 = sum Pi_{n-1} b1_n is a scalar perpetuity of its own.
            const double aw1 = c.a * w.x1_prime;
            acc.plus1.add(term(aw1, c.b1, 1.0));
            acc.minus1.add(term(aw1, c.b1, -1.0));
        }
    };
    const GoldieAcc acc = parallel_reduce<GoldieAcc>(options.n_samples, options.workers, body);

    const double scale = 1.0 / (alpha * cramer.rho);
    TailConstants out;
    out.method = ConstantMethod::goldie_formula;
    out.n_samples = options.n_samples;
    out.c_plus = std::max(0.0, acc.plus.mean() * scale);
    out.c_minus = std::max(0.0, acc.minus.mean() * scale);
    out.se_plus = acc.plus.standard_error() * scale;
    out.se_minus = acc.minus.standard_error() * scale;
    if (with_b1) {
        out.c1_plus = std::max(0.0, acc.plus1.mean() * scale);
        out.c1_minus = std::max(0.0, acc.minus1.mean() * scale);
        out.se1_plus = acc.plus1.standard_error() * scale;
        out.se1_minus = acc.minus1.standard_error() * scale;
    }
    out.plus_positive = tail_constant_positive(law, 1.0);
    out.minus_positive = tail_constant_positive(law, -1.0);
    if (!out.plus_positive && out.c_plus > 3.0 * out.se_plus) {
        out.warnings.push_back("support criterion says c+ = 0 but the estimate is " + fmt(out.c_plus));
    }
    if (!out.minus_positive && out.c_minus > 3.0 * out.se_minus) {
        out.warnings.push_back("support criterion says c- = 0 but the estimate is " + fmt(out.c_minus));
    }
    if (out.c_plus > 0.0 && out.se_plus > 0.1 * out.c_plus) {
        out.warnings.push_back("heavy-tailed integrand: relative SE of c+ is " + fmt(out.se_plus / out.c_plus));
    }
    if (out.c_minus > 0.0 && out.se_minus > 0.1 * out.c_minus) {
        out.warnings.push_back("heavy-tailed integrand: relative SE of c- is " + fmt(out.se_minus / out.c_minus));
    }
    return out;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::centered: return "centered";
        case Regime::noncentered: return "noncentered";
        case Regime::decoupled: return "decoupled";
    }
    return "?";
}

Regime decide_regime(const CramerReport& cramer) {
    const bool zero_s = cramer.s_se == 0.0 ? std::abs(cramer.s) <= 1e-10
                                           : std::abs(cramer.s) <= 3.0 * cramer.s_se;
    if (!zero_s) return Regime::noncentered;
    return cramer.K.xx > 0.0 ? Regime::centered : Regime::decoupled;
}

PredictionReport predicted_limits(const CramerReport& cramer, const TailConstants& constants) {
    PredictionReport rep;
    rep.regime = decide_regime(cramer);
    rep.alpha = cramer.alpha;
    rep.rho = cramer.rho;
    rep.s = cramer.s;
    rep.c_plus = constants.c_plus;
    rep.c_minus = constants.c_minus;
    rep.x2_right = constants.c_plus;
    rep.x2_left = constants.c_minus;
    const double alpha = cramer.alpha;
    const double rho = cramer.rho;

    switch (rep.regime) {
        case Regime::centered: {
            rep.alphatilde = 0.5 * alpha;
            rep.c0 = c0_of_K(cramer.K, alpha);
            const double base = (constants.c_plus + constants.c_minus) * rep.c0;
            rep.limit_right = rep.limit_left = base * std::pow(rho, -rep.alphatilde);
            rep.literal_right = rep.literal_left = base * std::pow(rho, rep.alphatilde);
            if (cramer.detK == 0.0 && cramer.K.xx != 1.0) {
                rep.warnings.push_back(
                    "det K = 0: c0 uses N(0, K11) with K11 = " + fmt(cramer.K.xx) +
                    "; a standard normal limit would give a different constant");
            }
            break;
        }
        case Regime::noncentered: {
            rep.alphatilde = alpha;
            const double sa = std::pow(std::abs(cramer.s), alpha);
            const double right = cramer.s > 0.0 ? constants.c_plus : constants.c_minus;
            const double left = cramer.s > 0.0 ? constants.c_minus : constants.c_plus;
            rep.limit_right = right * sa * std::pow(rho, -alpha);
            rep.limit_left = left * sa * std::pow(rho, -alpha);
            rep.literal_right = right * sa * std::pow(rho, alpha);
            rep.literal_left = left * sa * std::pow(rho, alpha);
            break;
        }
        case Regime::decoupled: {
            rep.alphatilde = 0.0;
            rep.limit_right = rep.literal_right = constants.c1_plus;
            rep.limit_left = rep.literal_left = constants.c1_minus;
            if (std::isnan(constants.c1_plus)) {
                rep.warnings.push_back("decoupled regime: X1 constants were not estimated");
            }
            break;
        }
    }
    std::ostringstream note;
    note << "for v with v1 > 0, P(<v, X> > t) t^alpha (log t)^-" << rep.alphatilde
         << " tends to a multiple of the X1 limit; candidate factors v1 and v1^alpha";
    rep.projection_note = note.str();
    return rep;
}

LdApproximation ld_approx(const CoefficientLaw& law, long n, double c, double gamma_n) {
    if (n < 1) throw ParameterError("ld_approx needs n >= 1");
    auto dlambda = [&](double b) { return mellin_log(law, b).value / mellin(law, b).value; };
    const double mean = mellin_log(law, 0.0).value;
    if (!(c > mean)) throw RangeError("c must exceed E log a = " + fmt(mean));

    const auto dom_hi = law.mellin_domain().second;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::quiet_NaN();
    double beta = 1.0;
    for (int k = 0; k < 200; ++k) {
        if (!law.in_mellin_domain(beta)) {
            beta = 0.5 * (lo + dom_hi);
            if (!law.in_mellin_domain(beta) || beta == lo) break;
        }
        if (dlambda(beta) > c) {
            hi = beta;
            break;
        }
        lo = beta;
        beta *= 2.0;
    }
    if (std::isnan(hi)) throw RangeError("c = " + fmt(c) + " is not below sup Lambda'");

    auto f = [&](double b) { return dlambda(b) - c; };
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
    const double tilt = 0.5 * (a + b);
    const double m = mellin(law, tilt).value;
    const double lambda = std::log(m);
    const double d1 = mellin_log(law, tilt).value / m;
    const double sigma2 = mellin_log2(law, tilt).value / m - d1 * d1;
    const double sigma = std::sqrt(sigma2);
    const double nn = static_cast<double>(n);
    const double rate = tilt * (c + gamma_n) - lambda + gamma_n * gamma_n / (2.0 * sigma2);
    LdApproximation out;
    out.tilt = tilt;
    out.sigma2 = sigma2;
    out.value = std::exp(-nn * rate) / (tilt * sigma * std::sqrt(2.0 * std::numbers::pi * nn));
    return out;
}

double berry_esseen_reference(double r, double x, long n, const SummandMoments& m) {
    if (r < 3.0) throw ParameterError("Berry-Esseen reference needs r >= 3");
    if (!(m.m2 > 0.0)) throw ParameterError("Berry-Esseen reference needs m2 > 0");
    if (n < 1) throw ParameterError("Berry-Esseen reference needs n >= 1");
    const double sigma = std::sqrt(m.m2);
    const double nn = static_cast<double>(n);
    const double first = m.m3 / (sigma * sigma * sigma) / std::sqrt(nn);
    const double second = m.mr / std::pow(sigma, r) * std::pow(nn, -(r - 2.0) / 2.0);
    return std::pow(1.0 + std::abs(x), -r) * (first + second);
}

double kolmogorov_distance_to_normal(std::vector<double>& z) {
    if (z.empty()) throw EmptyGrid("no samples");
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = normal_cdf(z[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace tripert
