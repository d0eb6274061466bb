#include "rkdopt/normal.hpp"

#include <limits>

namespace rkdopt {

namespace {

// Rational approximation for the inverse normal CDF (Acklam-type), used as
// an initial guess only.
double quantile_guess(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
    }
    double x = quantile_guess(p);
    // Halley refinement on Phi(x) - p = 0.
    for (int it = 0; it < 2; ++it) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double folded_normal_cv(double t_bar, double alpha) {
    if (!std::isfinite(t_bar) || t_bar < 0.0) {
        throw std::invalid_argument("folded_normal_cv: t_bar must be finite and nonnegative");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("folded_normal_cv: alpha must lie in (0,1)");
    }
    const double z = normal_quantile(1.0 - alpha / 2.0);
    auto coverage = [&](double c) { return normal_cdf(c - t_bar) - normal_cdf(-c - t_bar); };

    double lo = z;
    double hi = t_bar + z + 10.0;
    if (coverage(lo) >= 1.0 - alpha) {
        return lo; // t_bar == 0 reduces to the two-sided normal quantile
    }
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (coverage(mid) < 1.0 - alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace rkdopt
