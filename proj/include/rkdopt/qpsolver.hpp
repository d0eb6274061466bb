#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkdopt::qp {

// One convex quadratic inequality 1/2 x'Qx + c'x + d <= 0 with Q PSD.
struct QuadInequality {
    Eigen::SparseMatrix<double> Q;
    Eigen::VectorXd c;
    double d = 0.0;
};

// minimize 1/2 x'Px + q'x
// s.t.     A x = b
//          G x <= h
//          quadratic inequalities (optional)
struct Problem {
    int n = 0;
    Eigen::SparseMatrix<double> P;
    Eigen::VectorXd q;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    Eigen::SparseMatrix<double> G;
    Eigen::VectorXd h;
    std::vector<QuadInequality> quad;
};

struct Settings {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    int max_iter = 200;
    // Optional start; must satisfy the quadratic inequalities strictly when
    // any are present.
    Eigen::VectorXd x0;
};

struct Result {
    Eigen::VectorXd x;
    Eigen::VectorXd y; // equality duals
    Eigen::VectorXd z; // inequality duals (linear rows first, then quadratic)
    int iterations = 0;
    double gap = 0.0;
    double r_dual = 0.0;
    double r_eq = 0.0;
    double r_ineq = 0.0;
    bool optimal = false;
    std::string message;

    double objective(const Problem& p) const {
        return 0.5 * x.dot(p.P.selfadjointView<Eigen::Lower>() * x) + p.q.dot(x);
    }
};

class SolverFailure : public std::runtime_error {
  public:
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

// Primal-dual interior-point method (Mehrotra predictor-corrector on the
// linear rows, centering steps for quadratic rows). P is read as its lower
// triangle. Throws SolverFailure only on malformed input; numerical failure
// is reported through Result::optimal / message.
Result solve(const Problem& problem, const Settings& settings);

} // namespace rkdopt::qp
