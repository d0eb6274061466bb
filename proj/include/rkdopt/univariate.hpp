#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace rkdopt {

// Brent's derivative-free minimizer: golden section with successive parabolic
// interpolation. Returns (x_min, f_min) for f on [a, b]. tol(x) is
// rel_tol*|x| + abs_tol.
inline std::pair<double, double> brent_minimize(const std::function<double(double)>& f, double a,
                                                double b, double rel_tol, double abs_tol,
                                                int max_iter = 200) {
    const double gold = 0.5 * (3.0 - std::sqrt(5.0));
    double x = a + gold * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        double m = 0.5 * (a + b);
        double tol = rel_tol * std::abs(x) + abs_tol;
        double tol2 = 2.0 * tol;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;

        bool parabolic_ok = false;
        double u = 0.0;
        if (std::abs(e) > tol) {
            // Trial parabola through (v, fv), (w, fw), (x, fx).
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol : -tol;
                parabolic_ok = true;
            }
        }
        if (!parabolic_ok) {
            e = (x < m) ? b - x : a - x;
            d = gold * e;
        }
        u = (std::abs(d) >= tol) ? x + d : x + ((d > 0.0) ? tol : -tol);
        double fu = f(u);

        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx};
}

} // namespace rkdopt
