#include "tripert/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <limits>

namespace tripert {

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tolerance) {
    if (lo == hi) return 0.0;
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, tolerance,
                                                                          &error);
}

double gaussian_expectation(const std::function<double(double)>& f, double mean, double sd) {
    if (sd == 0.0) return f(mean);
    // Split at the mode so the kernel peak is never straddled by a single panel.
    auto g = [&](double z) { return f(mean + sd * z) * normal_pdf(z); };
    constexpr double inf = std::numeric_limits<double>::infinity();
    return integrate(g, -inf, 0.0) + integrate(g, 0.0, inf);
}

double gaussian_abs_moment(double mean, double var, double p) {
    if (var == 0.0) return std::pow(std::abs(mean), p);
    if (mean == 0.0) {
        return std::pow(2.0 * var, 0.5 * p) * boost::math::tgamma(0.5 * (p + 1.0)) /
               std::sqrt(std::numbers::pi);
    }
    return gaussian_expectation([p](double x) { return std::pow(std::abs(x), p); }, mean,
                                std::sqrt(var));
}

}  // namespace tripert
