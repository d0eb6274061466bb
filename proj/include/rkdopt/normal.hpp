#pragma once

#include <cmath>
#include <stdexcept>

namespace rkdopt {

// Standard normal CDF via the complementary error function. erfc keeps full
// relative accuracy in the lower tail where 0.5*(1+erf) would cancel.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Quantile of the standard normal. Rational initial guess (Wichura-style)
// polished with two Halley steps against normal_cdf, giving abs error well
// below 1e-13 over (0,1).
double normal_quantile(double p);

// (1-alpha) quantile of |N(t_bar, 1)|, the critical value that absorbs a
// bias bounded by t_bar standard deviations. Solves
//   Phi(c - t_bar) - Phi(-c - t_bar) = 1 - alpha
// by bracketed bisection on [z_{1-alpha/2}, t_bar + z_{1-alpha/2} + 10].
// Monotone in c, so convergence is guaranteed; tolerance 1e-10.
double folded_normal_cv(double t_bar, double alpha);

} // namespace rkdopt
