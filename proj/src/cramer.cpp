#include "tripert/cramer.hpp"

#include "tripert/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tripert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lambda_at(const CoefficientLaw& law, double beta) {
    const double m = mellin(law, beta).value;
    return m > 0.0 ? std::log(m) : -kInf;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

}  // namespace

double SymMatrix2::min_eigenvalue() const noexcept {
    const double mean = 0.5 * (xx + yy);
    const double half_gap = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return mean - half_gap;
}

const AssumptionFlag* CramerReport::flag(const std::string& name) const {
    for (const auto& f : flags) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

double solve_alpha(const CoefficientLaw& law, double tol) {
    const double drift = mellin_log(law, 0.0).value;
    if (!(drift < 0.0)) {
        throw DriftError("E log a = " + fmt(drift) + " is not negative; no stationary solution");
    }

    // Lambda is convex with Lambda(0) = 0 and Lambda'(0) < 0, so it is
    // negative on (0, alpha) and positive beyond.
    const auto [dom_lo, dom_hi] = law.mellin_domain();
    (void)dom_lo;
    double lo = 0.0;
    double hi = kInf;
    double beta = 1.0;
    for (int step = 0; step < 64; ++step) {
        if (!law.in_mellin_domain(beta)) {
            // Move half-way towards the edge of the domain.
            beta = 0.5 * (lo + dom_hi);
            if (!law.in_mellin_domain(beta)) break;
        }
        const double value = lambda_at(law, beta);
        if (value > 0.0) {
            hi = beta;
            break;
        }
        lo = beta;
        beta *= 2.0;
    }
    if (!std::isfinite(hi)) {
        throw NoRootError("log E a^beta stays non-positive on the finiteness domain; no Cramer root");
    }

    auto f = [&](double b) { return lambda_at(law, b); };
    if (lo == 0.0) {
        // Bracket from below: Lambda < 0 just right of 0.
        double probe = hi;
        for (int step = 0; step < 64 && f(probe) >= 0.0; ++step) probe *= 0.5;
        if (f(probe) >= 0.0) throw NoRootError("could not bracket the Cramer root from below");
        lo = probe;
    }

    std::uintmax_t max_iter = 200;
    auto tolerance = boost::math::tools::eps_tolerance<double>(52);
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tolerance, max_iter);
    double alpha = 0.5 * (a + b);
    const double fa = std::abs(f(a));
    const double fb = std::abs(f(b));
    const double fm = std::abs(f(alpha));
    if (fa < fm && fa <= fb) alpha = a;
    else if (fb < fm) alpha = b;
    const double residual = std::abs(f(alpha));
    if (residual > tol && residual > 1e-13 * std::max(1.0, alpha)) {
        throw NonConvergence("Cramer root residual " + fmt(residual) + " exceeds tolerance " + fmt(tol));
    }
    return alpha;
}

bool check_fixed_point(const CoefficientLaw& law, std::size_t n_samples, std::uint64_t seed) {
    const auto& b2 = law.b2_family();
    const auto* b2_const = std::get_if<ConstantB>(&b2);
    if (b2_const == nullptr) {
        if (const auto* g = std::get_if<GaussianB>(&b2); g != nullptr && g->var == 0.0) {
            // Degenerate Gaussian, same as a constant.
        } else {
            return true;
        }
    }
    const double c = b2_const ? b2_const->c : std::get<GaussianB>(b2).mean;
    if (c == 0.0) return false;                 // x = 0 is fixed
    if (law.symmetrize_b()) return true;        // b2 = +-c: two values
    if (!law.a_is_degenerate() && law.non_arithmetic() &&
        !std::holds_alternative<CustomA>(law.a_family())) {
        return true;  // P(a = 1 - c / x) = 0 for every x
    }

    const auto& a = law.a_family();
    if (const auto* f = std::get_if<ConstantA>(&a)) return f->c == 1.0;
    if (const auto* f = std::get_if<ShiftedSquareA>(&a)) return f->shift == 1.0;
    if (const auto* f = std::get_if<DiscreteA>(&a)) {
        // x = c / (1 - u) must hold for every atom u.
        for (double u : f->values) {
            if (u == 1.0 || std::abs(u - f->values.front()) > 1e-12) return true;
        }
        return false;
    }

    // Sampled families: is c / (1 - a) a single constant?
    RandomStream rng(seed);
    double ratio = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double u = law.sample_a(rng);
        if (u == 1.0) return true;
        const double r = c / (1.0 - u);
        if (std::isnan(ratio)) {
            ratio = r;
        } else if (std::abs(r - ratio) > 1e-12 * std::max(1.0, std::abs(ratio))) {
            return true;
        }
    }
    return false;
}

double default_moment_order(double alpha) { return std::max(3.0, 2.0 * alpha + 2.0); }

CramerReport spectral_report(const CoefficientLaw& law, double alpha, double r) {
    CramerReport rep;
    rep.alpha = alpha;
    rep.r = r;
    rep.root_residual = lambda_at(law, alpha);
    rep.mean_log_a = mellin_log(law, 0.0).value;

    auto add = [&](std::string name, bool passed, std::string detail, bool fatal = true) {
        rep.flags.push_back({std::move(name), passed, fatal, std::move(detail)});
        if (!passed && !fatal) rep.warnings.push_back(rep.flags.back().name + ": " + rep.flags.back().detail);
    };

    add("non_arithmetic", law.non_arithmetic(),
        law.non_arithmetic() ? "declared by family" : "log a is lattice-valued; renewal limits may not exist",
        false);

    const Moment m = mellin(law, alpha);
    const Moment ml = mellin_log(law, alpha);
    rep.rho = ml.value / m.value;
    const bool root_ok = std::abs(rep.root_residual) <= 1e-8 && rep.rho > 0.0 && std::isfinite(rep.rho);
    add("cramer_root", root_ok,
        "log E a^alpha = " + fmt(rep.root_residual) + ", rho = " + fmt(rep.rho));

    const double b1m = law.b_abs_moment(1, alpha);
    const double b2m = law.b_abs_moment(2, alpha);
    add("b_moments", std::isfinite(b1m + b2m), "E|b1|^alpha + E|b2|^alpha = " + fmt(b1m + b2m));

    const bool no_fixed = check_fixed_point(law);
    add("no_fixed_point", no_fixed, no_fixed ? "P(a x + b2 = x) < 1" : "a x + b2 = x has a constant solution");

    // Shrink epsilon0 until a^(alpha + eps) stays integrable; b2 and |y| moments
    // of every built-in family are finite at all orders.
    double eps = 0.5;
    bool eps_ok = false;
    for (int k = 0; k < 60; ++k, eps *= 0.5) {
        if (law.in_mellin_domain(alpha + eps) && std::isfinite(mellin(law, alpha + eps).value)) {
            eps_ok = true;
            break;
        }
    }
    rep.epsilon0 = eps_ok ? eps : 0.0;
    add("moment_margin", eps_ok, eps_ok ? "epsilon0 = " + fmt(eps) : "no epsilon0 > 0 found");

    // Tilted second-order structure. log a - rho has tilted variance
    // E a^alpha (log a)^2 - rho^2 at the root.
    const Moment ml2 = mellin_log2(law, alpha);
    const double var_log = std::max(0.0, ml2.value / m.value - rep.rho * rep.rho);
    const CrossMoments cm = cross_moments(law, alpha, r);
    rep.s = cm.s.value;
    rep.s_se = cm.s.se;
    rep.abs_r_moment = cm.abs_r.value;
    std::visit(
        [&](const auto& y) {
            using T = std::decay_t<decltype(y)>;
            if constexpr (std::is_same_v<T, ConstantY>) {
                rep.K = {0.0, 0.0, var_log};
            } else if constexpr (std::is_same_v<T, GaussianY>) {
                rep.K = {y.var, 0.0, var_log};
            } else {
                rep.K = {y.lambda * y.lambda * var_log, y.lambda * var_log, var_log};
            }
        },
        law.y_family());
    rep.detK = rep.K.det();
    if (std::abs(rep.detK) < 1e-14 * std::max(1.0, rep.K.xx * rep.K.yy)) rep.detK = 0.0;

    const double ey2 = rep.K.xx + rep.s * rep.s;
    add("tilted_y_second_moment", std::isfinite(ey2), "E_alpha y^2 = " + fmt(ey2));

    const bool r_ok = r >= 3.0 && r > 2.0 * alpha + 1.0 && std::isfinite(rep.abs_r_moment);
    add("y_moment_order", r_ok,
        "r = " + fmt(r) + ", E|y|^r a^alpha = " + fmt(rep.abs_r_moment) + " (need r >= 3, r > 2 alpha + 1)");

    const bool psd = rep.K.min_eigenvalue() >= -1e-10;
    add("K_psd", psd, "min eigenvalue " + fmt(rep.K.min_eigenvalue()));

    for (const auto& f : rep.flags) {
        if (f.fatal && !f.passed) throw AssumptionError(f.name + ": " + f.detail);
    }
    return rep;
}

CramerReport analyze(const CoefficientLaw& law, std::optional<double> r, double tol) {
    const double alpha = solve_alpha(law, tol);
    return spectral_report(law, alpha, r.value_or(default_moment_order(alpha)));
}

// ---------------------------------------------------------------------------
// Tilted law
// ---------------------------------------------------------------------------

namespace {

// Shifted-square tilt: target density of Z is (lambda z^2 + shift)^alpha phi(z)
// up to normalization. Proposal N(0, v). The log envelope
//   sup_z [alpha log(lambda z^2 + shift) - z^2 (1 - 1/v) / 2] + log sqrt(v)
// is minimized over v by golden-section search.
double shifted_square_log_envelope(const ShiftedSquareA& f, double alpha, double v) {
    const double k = 0.5 * (1.0 - 1.0 / v);
    double u_star = 0.0;  // maximizing z^2
    if (f.shift == 0.0) {
        u_star = alpha / k;
    } else if (alpha * f.lambda / f.shift > k) {
        u_star = alpha / k - f.shift / f.lambda;
    }
    return alpha * std::log(f.lambda * u_star + f.shift) - k * u_star + 0.5 * std::log(v);
}

}  // namespace

TiltedLaw::TiltedLaw(const CoefficientLaw& base, double alpha, TiltMode mode)
    : base_(&base), alpha_(alpha), mode_(mode) {
    const auto& a = base.a_family();
    if (mode == TiltMode::rejection) {
        double sup = kInf;
        if (const auto* f = std::get_if<ConstantA>(&a)) sup = f->c;
        if (const auto* f = std::get_if<DiscreteA>(&a)) sup = *std::max_element(f->values.begin(), f->values.end());
        if (const auto* f = std::get_if<CustomA>(&a)) sup = f->support_max;
        if (const auto* f = std::get_if<ShiftedSquareA>(&a); f != nullptr && f->lambda == 0.0) sup = f->shift;
        if (!std::isfinite(sup)) {
            throw UnboundedEnvelopeError("a^alpha is unbounded on the support of a; rejection tilt impossible");
        }
        envelope_ = std::pow(sup, alpha);
        return;
    }
    if (const auto* f = std::get_if<DiscreteA>(&a)) {
        probs_.resize(f->values.size());
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            probs_[i] = f->probs[i] * std::pow(f->values[i], alpha);
            total += probs_[i];
        }
        for (double& p : probs_) p /= total;
    } else if (const auto* f = std::get_if<ShiftedSquareA>(&a); f != nullptr && f->lambda > 0.0) {
        double lo = 1.0 + 1e-9;
        double hi = 1e4;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 200; ++it) {
            const double x1 = hi - g * (hi - lo);
            const double x2 = lo + g * (hi - lo);
            if (shifted_square_log_envelope(*f, alpha, x1) < shifted_square_log_envelope(*f, alpha, x2)) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        proposal_var_ = 0.5 * (lo + hi);
        log_envelope_ = shifted_square_log_envelope(*f, alpha, proposal_var_);
    }
}

double TiltedLaw::sample_a(RandomStream& rng) const {
    const auto& a = base_->a_family();
    constexpr long kMaxTries = 100'000'000;
    if (mode_ == TiltMode::rejection) {
        for (long i = 0; i < kMaxTries; ++i) {
            const double u = base_->sample_a(rng);
            if (rng.uniform() * envelope_ <= std::pow(u, alpha_)) return u;
        }
        throw NonConvergence("rejection tilt: acceptance rate too small");
    }
    if (const auto* f = std::get_if<LogNormalA>(&a)) {
        return std::exp(rng.normal(f->mu + alpha_ * f->sigma2, std::sqrt(f->sigma2)));
    }
    if (const auto* f = std::get_if<ConstantA>(&a)) return f->c;
    if (const auto* f = std::get_if<DiscreteA>(&a)) {
        double u = rng.uniform();
        for (std::size_t i = 0; i + 1 < probs_.size(); ++i) {
            if (u < probs_[i]) return f->values[i];
            u -= probs_[i];
        }
        return f->values.back();
    }
    if (const auto* f = std::get_if<ShiftedSquareA>(&a)) {
        if (f->lambda == 0.0) return f->shift;
        const double sd = std::sqrt(proposal_var_);
        const double k = 0.5 * (1.0 - 1.0 / proposal_var_);
        for (long i = 0; i < kMaxTries; ++i) {
            const double z = rng.normal(0.0, sd);
            const double u = f->lambda * z * z + f->shift;
            const double log_ratio = alpha_ * std::log(u) - k * z * z + 0.5 * std::log(proposal_var_);
            if (std::log(rng.uniform()) <= log_ratio - log_envelope_) return u;
        }
        throw NonConvergence("shifted-square tilt: acceptance rate too small");
    }
    throw UnboundedEnvelopeError("no analytic tilt for this family; use rejection with a bounded support");
}

CoefficientSample TiltedLaw::sample(RandomStream& rng) const {
    const double a = sample_a(rng);
    return base_->complete(a, rng);
}

TiltedLaw tilt(const CoefficientLaw& law, double alpha, std::optional<TiltMode> requested) {
    if (requested) return TiltedLaw(law, alpha, *requested);
    const bool has_analytic = !std::holds_alternative<CustomA>(law.a_family());
    return TiltedLaw(law, alpha, has_analytic ? TiltMode::analytic : TiltMode::rejection);
}

}  // namespace tripert
