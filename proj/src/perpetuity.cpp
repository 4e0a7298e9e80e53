#include "tripert/perpetuity.hpp"

#include "tripert/errors.hpp"
#include "tripert/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tripert {

SeriesTailBound::SeriesTailBound(const CoefficientLaw& law) {
    double beta = 1.0;
    bool found = false;
    for (int k = 0; k < 60; ++k, beta *= 0.5) {
        if (law.in_mellin_domain(beta) && mellin(law, beta).value < 1.0) {
            found = true;
            break;
        }
    }
    if (!found) throw DomainError("no beta in (0, 1] with E a^beta < 1; the series does not contract");
    beta_ = beta;
    m_ = mellin(law, beta).value;

    const double eb1 = law.b_abs_moment(1, beta);
    const double eb2 = law.b_abs_moment(2, beta);
    const double eya = std::visit(
        [&](const auto& y) -> double {
            using T = std::decay_t<decltype(y)>;
            if constexpr (std::is_same_v<T, ConstantY>) {
                return std::pow(std::abs(y.c), beta) * m_;
            } else if constexpr (std::is_same_v<T, GaussianY>) {
                return gaussian_abs_moment(y.mean, y.var, beta) * m_;
            } else {
                const double lam = y.lambda;
                const double off = y.offset;
                return law.expect_a(beta, [&](double x) { return std::pow(std::abs(lam * (x - off)), beta); })
                    .value;
            }
        },
        law.y_family());
    const double gap = 1.0 - m_;
    y_part_ = eb2 / gap;
    const_part_ = (eb1 + eb2) / gap + eya * eb2 / (gap * gap);
    inflate_ = std::pow(kExceedance, -1.0 / beta);
}

double SeriesTailBound::operator()(double pi, double abs_y) const {
    if (beta_ == 1.0) return (pi * (const_part_ + abs_y * y_part_)) * inflate_;
    const double v = std::pow(pi, beta_) * (const_part_ + std::pow(abs_y, beta_) * y_part_);
    return std::pow(v, 1.0 / beta_) * inflate_;
}

StationaryPair simulate_stationary(const CoefficientLaw& law, double trunc_tol, RandomStream& rng,
                                   long max_steps) {
    if (!(mellin_log(law, 0.0).value < 0.0)) throw DriftError("E log a >= 0; no stationary solution");
    const SeriesTailBound bound(law);
    StationaryPair out;
    // Running backward product A_1 ... A_{n-1} = [[p11, p12], [0, p11]].
    double p11 = 1.0;
    double p12 = 0.0;
    double y_sum = 0.0;
    CompensatedSum x1, x2, x1p, x0;
    for (long n = 1;; ++n) {
        if (n > max_steps) {
            throw NonConvergence("backward series did not reach the truncation tolerance within " +
                                 std::to_string(max_steps) + " steps");
        }
        const CoefficientSample c = law.sample(rng);
        x1.add(p11 * c.b1 + p12 * c.b2);
        x2.add(p11 * c.b2);
        x1p.add(p11 * c.b1);
        x0.add(p11 * y_sum * c.b2);
        p12 = (p11 * c.y + p12) * c.a;
        p11 *= c.a;
        y_sum += c.y;
        const double b = bound(p11, std::abs(y_sum));
        if (b < trunc_tol * (1.0 + std::abs(x1.value()) + std::abs(x2.value()))) {
            out.truncation_n = n;
            out.truncation_bound = b;
            break;
        }
    }
    out.x1 = x1.value();
    out.x2 = x2.value();
    out.x1_prime = x1p.value();
    out.x0 = x0.value();
    return out;
}

std::vector<std::pair<double, double>> forward_trace(const CoefficientLaw& law, std::size_t steps,
                                                     std::size_t burn_in, RandomStream& rng) {
    std::vector<std::pair<double, double>> out;
    out.reserve(steps);
    double x1 = 0.0;
    double x2 = 0.0;
    for (std::size_t n = 0; n < burn_in + steps; ++n) {
        const CoefficientSample c = law.sample(rng);
        x1 = c.a * (x1 + c.y * x2) + c.b1;
        x2 = c.a * x2 + c.b2;
        if (n >= burn_in) out.emplace_back(x1, x2);
    }
    return out;
}

BlockGeometry make_geometry(const CramerReport& cramer, double t, double D) {
    if (!(t > std::exp(std::numbers::e))) {
        throw DomainError("block decomposition needs t > e^e (log log t > 0)");
    }
    if (!(D > 0.0)) throw DomainError("window constant D must be > 0");
    BlockGeometry g;
    g.t = t;
    g.D = D;
    const double lt = std::log(t);
    g.n0_exact = lt / cramer.rho;
    g.L_exact = D * std::sqrt(std::log(lt) * lt);
    g.n0 = std::lround(g.n0_exact);
    g.L = std::lround(g.L_exact);
    g.p = std::max(g.n0 - g.L - 1, 0L);
    g.block_end = g.n0 + g.L;
    return g;
}

std::string to_string(Target t) {
    switch (t) {
        case Target::x1: return "x1";
        case Target::x2: return "x2";
        case Target::x0: return "x0";
        case Target::n_t: return "nt";
        case Target::m_t: return "mt";
        case Target::m_prime: return "mprime";
        case Target::m_double_prime: return "mdprime";
        case Target::n_inf: return "ninf";
        case Target::r_t: return "rt";
        case Target::projection: return "projection";
    }
    return "?";
}

Target parse_target(const std::string& name) {
    for (Target t : {Target::x1, Target::x2, Target::x0, Target::n_t, Target::m_t, Target::m_prime,
                     Target::m_double_prime, Target::n_inf, Target::r_t, Target::projection}) {
        if (to_string(t) == name) return t;
    }
    throw ParameterError("unknown target '" + name + "'");
}

double target_value(const BlockSample& s, const TargetSpec& target) {
    switch (target.kind) {
        case Target::x1: return s.x1;
        case Target::x2: return s.x2;
        case Target::x0: return s.x0;
        case Target::n_t: return s.n_t;
        case Target::m_t: return s.m_t;
        case Target::m_prime: return s.m_prime;
        case Target::m_double_prime: return s.m_double_prime;
        case Target::n_inf: return s.n_inf;
        case Target::r_t: return s.r_t;
        case Target::projection: return target.v1 * s.x1 + target.v2 * s.x2;
    }
    return 0.0;
}

BlockSampler::BlockSampler(const CoefficientLaw& law, const CramerReport& cramer, BlockGeometry geometry,
                           WalkOptions options, std::optional<TiltMode> tilt_mode)
    : law_(&law), bound_(law), geometry_(geometry), options_(options) {
    if (options_.plan != TiltPlan::none) tilted_.emplace(tilt(law, cramer.alpha, tilt_mode));
}

BlockSample BlockSampler::draw(RandomStream& rng) const {
    const BlockGeometry& g = geometry_;
    BlockSample s;
    s.t = g.t;
    s.n0 = g.n0;
    s.L = g.L;
    s.D = g.D;
    s.p = g.p;
    s.block_end = g.block_end;

    const double alpha = tilted_ ? tilted_->alpha() : 0.0;
    const long p = g.p;
    const long end = g.block_end;
    const Target mon = options_.monitor.kind;

    bool tilting = options_.plan == TiltPlan::stopped || (options_.plan == TiltPlan::fixed_horizon && p > 0);
    double pi = 1.0;  // Pi_{k-1}
    double y = 0.0;   // Y_{k-1}
    double p11 = 1.0;
    double p12 = 0.0;
    double pi_p = 1.0;
    double y_p = 0.0;
    double q = 1.0;  // a_{p+1} ... a_{k-1}
    double log_w = 0.0;
    CompensatedSum x1, x2, x1p, x0, nt, mt, ninf, S, mpp, rt, rpp;

    // Step k draws b_k first: the term Pi_{k-1} (b1_k + Y_{k-1} b2_k) and hence
    // every partial sum up to k is known before a_k is drawn, so the decision
    // to tilt a_k depends only on the past and b_k (which is never tilted).
    for (long k = 1;; ++k) {
        if (k > options_.max_steps) {
            throw NonConvergence("block trajectory did not reach the truncation tolerance within " +
                                 std::to_string(options_.max_steps) + " steps");
        }
        const auto [b1, b2] = law_->sample_b(rng);
        if (k == p + 1) {
            pi_p = pi;
            y_p = y;
        }

        const double term0 = pi * y * b2;
        x1.add(p11 * b1 + p12 * b2);
        x2.add(pi * b2);
        x1p.add(pi * b1);
        x0.add(term0);
        s.x0_abs += std::abs(term0);
        if (k >= 2 && k <= p) {
            nt.add(term0);
        } else if (k > p && k <= end) {
            mt.add(term0);
            s.m_abs += std::abs(term0);
            S.add(q * b2);
            mpp.add((y - y_p) * q * b2);
            const double r_term = pi * static_cast<double>(k - 1) * b2;
            rt.add(r_term);
            s.r_abs += std::abs(r_term);
            rpp.add(static_cast<double>(k - 1 - p) * pi * b2);
        } else if (k > end) {
            ninf.add(term0);
        }

        if (options_.plan == TiltPlan::fixed_horizon && k > p) tilting = false;
        if (tilting && options_.plan == TiltPlan::stopped) {
            double partial = 0.0;
            switch (mon) {
                case Target::x1: partial = x1.value(); break;
                case Target::x2: partial = x2.value(); break;
                case Target::x0: partial = x0.value(); break;
                case Target::n_t: partial = nt.value(); break;
                case Target::m_t: partial = mt.value(); break;
                case Target::m_prime: partial = pi_p * y_p * S.value(); break;
                case Target::m_double_prime: partial = pi_p * mpp.value(); break;
                case Target::n_inf: partial = ninf.value(); break;
                case Target::r_t: partial = rt.value(); break;
                case Target::projection:
                    partial = options_.monitor.v1 * x1.value() + options_.monitor.v2 * x2.value();
                    break;
            }
            if (pi > g.t || std::abs(partial) > g.t) tilting = false;
            if (pi * (1.0 + std::abs(y)) * options_.stop_scale > g.t) tilting = false;
        }

        const double a = tilting ? tilted_->sample_a(rng) : law_->sample_a(rng);
        if (tilting) {
            log_w -= alpha * std::log(a);
            ++s.tilted_steps;
        }
        const double yk = law_->sample_y(a, rng);

        p12 = (p11 * yk + p12) * a;
        p11 *= a;
        pi *= a;
        y += yk;
        if (k > p && k <= end) q *= a;

        if (k >= end && !tilting) {
            const double b = bound_(pi, std::abs(y));
            if (b < options_.trunc_tol * (1.0 + std::abs(x1.value()) + std::abs(x2.value()))) {
                s.truncation_n = k;
                s.truncation_bound = b;
                break;
            }
        }
    }

    s.x1 = x1.value();
    s.x2 = x2.value();
    s.x1_prime = x1p.value();
    s.x0 = x0.value();
    s.n_t = nt.value();
    s.m_t = mt.value();
    s.n_inf = ninf.value();
    s.s_2L = S.value();
    s.m_prime = pi_p * y_p * s.s_2L;
    s.m_double_prime = pi_p * mpp.value();
    s.r_t = rt.value();
    s.r_prime = static_cast<double>(p) * pi_p * s.s_2L;
    s.r_double_prime = rpp.value();
    s.log_weight = log_w;
    s.weight = std::exp(log_w);
    return s;
}

BlockSample sample_blocks(const CoefficientLaw& law, const CramerReport& cramer, double t, double D,
                          bool tilt_first_n, RandomStream& rng) {
    WalkOptions opt;
    opt.plan = tilt_first_n ? TiltPlan::fixed_horizon : TiltPlan::none;
    const BlockSampler sampler(law, cramer, make_geometry(cramer, t, D), opt);
    return sampler.draw(rng);
}

double choose_D(const CramerReport& cramer, double xi) {
    if (xi < 0.0) throw ParameterError("xi must be >= 0");
    return std::max(4.0, 2.0 * (cramer.alpha + xi + 2.0) / cramer.rho);
}

}  // namespace tripert
