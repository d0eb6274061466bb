#include "rkdopt/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rkdopt/normal.hpp"

namespace rkdopt {

Sample Sample::create(std::vector<double> x, std::vector<double> y,
                      std::optional<std::vector<double>> t,
                      std::optional<double> kink_denominator) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("Sample: x and y must have equal length");
    }
    if (t && t->size() != x.size()) {
        throw std::invalid_argument("Sample: t must have the same length as x");
    }
    std::set<double> below, above;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw std::invalid_argument("Sample: non-finite value in x or y");
        }
        if (t && !std::isfinite((*t)[i])) {
            throw std::invalid_argument("Sample: non-finite value in t");
        }
        if (x[i] < 0.0) {
            below.insert(x[i]);
        } else if (x[i] > 0.0) {
            above.insert(x[i]);
        }
    }
    if (below.size() < 2 || above.size() < 2) {
        throw std::invalid_argument(
            "Sample: need at least 2 distinct x strictly below 0 and 2 strictly above 0");
    }
    Sample s;
    s.x = std::move(x);
    s.y = std::move(y);
    s.t = std::move(t);
    s.kink_denominator = kink_denominator;
    return s;
}

Sample Sample::create_with_cutoff(std::vector<double> x, std::vector<double> y, double cutoff,
                                  std::optional<std::vector<double>> t,
                                  std::optional<double> kink_denominator) {
    for (double& v : x) v -= cutoff;
    return create(std::move(x), std::move(y), std::move(t), kink_denominator);
}

void SmoothnessSpec::validate() const {
    if (!(L >= 0.0) || !std::isfinite(L)) {
        throw std::invalid_argument("SmoothnessSpec: L must be a nonnegative real");
    }
    if (!(L_T >= 0.0) || !std::isfinite(L_T)) {
        throw std::invalid_argument("SmoothnessSpec: L_T must be a nonnegative real");
    }
    if (v != 0 && v != 1) {
        throw std::invalid_argument("SmoothnessSpec: v must be 0 or 1");
    }
}

double BiasProfile::eval(double t) const {
    if (knots.empty() || t <= knots.front() || t >= knots.back()) {
        return 0.0;
    }
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - knots.begin());
    std::size_t lo = hi - 1;
    double span = knots[hi] - knots[lo];
    if (span <= 0.0) return values[lo];
    double u = (t - knots[lo]) / span;
    return (1.0 - u) * values[lo] + u * values[hi];
}

HonestInterval build_interval(double estimate, double se, double max_bias, double alpha,
                              std::optional<double> kink_denominator) {
    if (!(se > 0.0) || !std::isfinite(se)) {
        throw std::invalid_argument("build_interval: se must be strictly positive");
    }
    if (!(max_bias >= 0.0) || !std::isfinite(max_bias)) {
        throw std::invalid_argument("build_interval: max_bias must be nonnegative");
    }
    HonestInterval iv;
    iv.estimate = estimate;
    iv.se = se;
    iv.max_bias = max_bias;
    iv.t_bar = max_bias / se;
    iv.alpha = alpha;
    iv.cv = folded_normal_cv(iv.t_bar, alpha);
    iv.lower = estimate - se * iv.cv;
    iv.upper = estimate + se * iv.cv;
    iv.honest = true;
    if (kink_denominator && *kink_denominator != 0.0) {
        TauInterval tau;
        double k = *kink_denominator;
        tau.estimate = estimate / k;
        double a = iv.lower / k;
        double b = iv.upper / k;
        tau.lower = std::min(a, b);
        tau.upper = std::max(a, b);
        iv.tau = tau;
    }
    return iv;
}

WeightDiagnostics diagnostics(const std::vector<double>& weights) {
    double sum_sq = 0.0, sum_abs = 0.0, max_sq = 0.0, max_abs = 0.0;
    for (double w : weights) {
        sum_sq += w * w;
        sum_abs += std::abs(w);
        max_sq = std::max(max_sq, w * w);
        max_abs = std::max(max_abs, std::abs(w));
    }
    if (sum_sq <= 0.0) {
        throw std::invalid_argument("diagnostics: all weights are zero");
    }
    return {max_sq / sum_sq, max_abs / sum_abs};
}

} // namespace rkdopt
