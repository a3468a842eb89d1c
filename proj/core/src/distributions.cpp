#include "panelecm/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace panelecm {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

}  // namespace

double normal_cdf(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    return boost::math::cdf(kStdNormal, z);
}

double normal_two_sided_p(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(z)) return 0.0;
    return 2.0 * boost::math::cdf(boost::math::complement(kStdNormal, std::abs(z)));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    return boost::math::quantile(kStdNormal, p);
}

double chi_square_cdf(double x, double df) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::cdf(boost::math::chi_squared_distribution<double>(df), x);
}

double chi_square_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

double chi_square_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("chi_square_quantile: p must lie in (0, 1), got " + std::to_string(p));
    }
    if (!(df >= 1.0)) throw std::invalid_argument("chi_square_quantile: df must be >= 1");
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

double student_t_two_sided_p(double t, double df) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
    return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(df), std::abs(t)));
}

double f_sf(double f, double df1, double df2) {
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(df1, df2), f));
}

}  // namespace panelecm
