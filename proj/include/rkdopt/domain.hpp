#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rkdopt {

// Observations with the threshold already normalized to zero. x >= 0 counts
// as the right (treated-slope) side throughout.
struct Sample {
    std::vector<double> x;
    std::vector<double> y;
    std::optional<std::vector<double>> t; // first-stage variable, fuzzy designs
    std::optional<double> kink_denominator; // known T'+(0) - T'-(0) for rescaling

    std::size_t size() const { return x.size(); }

    // Validates finiteness and that each side of zero holds at least two
    // distinct x values. Throws std::invalid_argument otherwise.
    static Sample create(std::vector<double> x, std::vector<double> y,
                         std::optional<std::vector<double>> t = std::nullopt,
                         std::optional<double> kink_denominator = std::nullopt);

    // Same, with x shifted by -cutoff first.
    static Sample create_with_cutoff(std::vector<double> x, std::vector<double> y, double cutoff,
                                     std::optional<std::vector<double>> t = std::nullopt,
                                     std::optional<double> kink_denominator = std::nullopt);
};

enum class Shape { none, concave, convex, increasing, decreasing };

// Curvature class description: second derivative of the CEF bounded by L on
// each side of zero, optionally shape-restricted. v selects the target: 0 for
// a level jump, 1 for a slope (kink) jump.
struct SmoothnessSpec {
    double L = 0.0;
    double L_T = 0.0; // first-stage bound, fuzzy designs only
    int v = 1;
    Shape shape = Shape::none;

    void validate() const;
};

// Piecewise-linear weighting kernel w-bar(t): breakpoints at the data x
// values and 0, together with the exact integral of its absolute value.
struct BiasProfile {
    std::vector<double> knots;  // sorted
    std::vector<double> values; // w-bar at each knot; linear in between
    double integral_abs = 0.0;
    double integral_pos = 0.0; // exact integral of max(w-bar, 0)
    double integral_neg = 0.0; // exact integral of max(-w-bar, 0)

    double eval(double t) const;
};

struct WeightSolution {
    std::vector<double> weights; // per observation
    double nu = 0.0;
    double lambda[4] = {0.0, 0.0, 0.0, 0.0};
    double r = 0.0;          // normalized worst-case bias; max bias = r * L
    double kappa = 1.0;
    double variance = 0.0;   // sum w_i^2 sigma_i^2
    double wratio_sq = 0.0;  // max w_i^2 / sum w_i^2
    double be_ratio = 0.0;   // max |w_i| / sum |w_i|
    bool nu_degenerate = false; // adversary constraint slack at zero cost
};

struct TauInterval {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct HonestInterval {
    double estimate = 0.0;
    double se = 0.0;
    double max_bias = 0.0;
    double t_bar = 0.0;
    double cv = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;
    bool honest = false;
    std::string method;
    std::optional<TauInterval> tau; // rescaled by a known kink denominator

    double half_length() const { return se * cv; }
};

// Interval around a linear estimate whose bias is bounded by max_bias:
// half-length = se * folded_normal_cv(max_bias / se, alpha).
HonestInterval build_interval(double estimate, double se, double max_bias, double alpha,
                              std::optional<double> kink_denominator = std::nullopt);

struct WeightDiagnostics {
    double wratio_sq = 0.0;
    double be_ratio = 0.0;
};

// max w_i^2 / sum w_i^2 and max |w_i| / sum |w_i|; throws on all-zero weights.
WeightDiagnostics diagnostics(const std::vector<double>& weights);

} // namespace rkdopt
