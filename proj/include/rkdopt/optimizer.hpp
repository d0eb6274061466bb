#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rkdopt/domain.hpp"
#include "rkdopt/grid.hpp"
#include "rkdopt/qpsolver.hpp"

namespace rkdopt {

class SolverFailure : public std::runtime_error {
  public:
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

class InfiniteBiasError : public std::runtime_error {
  public:
    explicit InfiniteBiasError(const std::string& what) : std::runtime_error(what) {}
};

enum class SolverMode { qp_direct, socp };

struct SolverConfig {
    SolverMode mode = SolverMode::qp_direct;
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    int max_iter = 200;
    double kappa = 1.0;
};

// The dual of the minimax weight problem, reparameterized so the remainder
// enters linearly, discretized on the grid. Variable layout:
//   [0, A)            reparameterized weights w~ at data-bearing centers
//   A                 nu  (adversary budget multiplier)
//   A+1 .. A+4        lambda (moment multipliers)
//   A+5 .. A+5+G      remainder values R~ at all centers
struct DualProblem {
    DiscreteGrid grid;
    std::vector<int> active;           // grid indices holding data
    std::vector<double> sigma2_active; // variance per active center
    SmoothnessSpec spec;
    double kappa = 1.0;
    ConstraintSet constraints;
    qp::Problem qp;

    int num_active() const { return static_cast<int>(active.size()); }
    int idx_nu() const { return num_active(); }
    int idx_lambda(int k) const { return num_active() + 1 + k; }
    int idx_remainder(int j) const { return num_active() + 5 + j; }
    int num_variables() const { return num_active() + 5 + grid.num_centers(); }
};

struct DualSolution {
    double nu = 0.0;
    double lambda[4] = {0, 0, 0, 0};
    std::vector<double> w_tilde;   // per active center
    std::vector<double> r_tilde;   // per grid center
    double objective = 0.0;        // value of the assembled quadratic program
    int iterations = 0;
    bool optimal = false;
    std::string status;
};

// sigma2 per observation -> pseudo-observation variance per grid center
// (inverse-variance pooling within each bin; zero where the bin is empty).
std::vector<double> aggregate_center_sigma2(const DiscreteGrid& grid,
                                            const std::vector<double>& sigma2_per_obs);

DualProblem assemble_dual(const DiscreteGrid& grid, const std::vector<double>& sigma2_at_centers,
                          const SmoothnessSpec& spec, double kappa);

// Solves the assembled program; throws SolverFailure with iterate diagnostics
// when the solver cannot reach optimality.
DualSolution solve(const DualProblem& problem, const SolverConfig& config);

// Plain-text sparse triplet dump of the assembled program, for debugging.
// Format: one "section row col value" line per nonzero; sections are
// objective-diag, objective-linear, eq (with rhs rows "eq-rhs row value"),
// ineq, ineq-rhs.
void dump_problem(const DualProblem& problem, std::ostream& os);

// Maps the dual solution back to per-observation weights, distributes bin
// weights proportionally to inverse variances, then applies the minimum-norm
// affine correction that makes the order-v moment conditions exact.
WeightSolution recover_weights(const DualSolution& solution, const DualProblem& problem,
                               const Sample& sample, const std::vector<double>& sigma2_per_obs);

struct WorstCaseBias {
    double max_bias = 0.0;
    BiasProfile profile;
};

// Exact worst-case conditional bias of order-v weights over the curvature
// class with bound L: builds the piecewise-linear kernel w-bar and integrates
// |w-bar| analytically, splitting segments at sign changes.
WorstCaseBias worst_case_bias(const std::vector<double>& weights, const std::vector<double>& xs,
                              double L, int v);

enum class KappaCriterion { umse, half_length };

struct OptimizeOptions {
    int grid_points = 0; // 0 -> default_num_centers
    SolverConfig solver;
    double kappa_lo = 1e-3;
    double kappa_hi = 1.0;
    double kappa_rel_tol = 1e-3;
};

struct OptimizeResult {
    double kappa = 1.0;
    WeightSolution weights;
    HonestInterval interval;
};

// Full solve pipeline for a fixed design: sigma2_solve drives the weight
// optimization, sigma2_report the reported interval. criterion umse solves at
// kappa = 1; half_length searches kappa in [kappa_lo, kappa_hi] by Brent
// minimization of the interval half-length (never returning anything longer
// than the kappa = 1 interval).
OptimizeResult optimize_kappa(const Sample& sample, const std::vector<double>& sigma2_solve,
                              const std::vector<double>& sigma2_report, const SmoothnessSpec& spec,
                              double alpha, KappaCriterion criterion,
                              const OptimizeOptions& options = {});

} // namespace rkdopt
