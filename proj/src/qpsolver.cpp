#include "rkdopt/qpsolver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace rkdopt::qp {

namespace {

constexpr double kStaticReg = 1e-8;

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// Largest alpha in (0, 1] with v + alpha*dv >= (1 - fraction) * v elementwise.
double step_to_boundary(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv[i] < 0.0) {
            alpha = std::min(alpha, -v[i] / dv[i]);
        }
    }
    return alpha;
}

} // namespace

Result solve(const Problem& problem, const Settings& settings) {
    const int n = problem.n;
    const int me = static_cast<int>(problem.A.rows());
    const int ml = static_cast<int>(problem.G.rows());
    const int nq = static_cast<int>(problem.quad.size());
    const int mi = ml + nq;

    if (problem.P.rows() != n || problem.q.size() != n) {
        throw SolverFailure("qp::solve: inconsistent objective dimensions");
    }
    if ((me > 0 && problem.A.cols() != n) || (ml > 0 && problem.G.cols() != n)) {
        throw SolverFailure("qp::solve: inconsistent constraint dimensions");
    }

    Eigen::VectorXd x = settings.x0.size() == n ? settings.x0 : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd z = Eigen::VectorXd::Ones(mi);
    Eigen::VectorXd s(mi);

    auto ineq_values = [&](const Eigen::VectorXd& xv) {
        Eigen::VectorXd g(mi);
        if (ml > 0) g.head(ml) = problem.G * xv - problem.h;
        for (int k = 0; k < nq; ++k) {
            const auto& qc = problem.quad[k];
            g[ml + k] = 0.5 * xv.dot(qc.Q.selfadjointView<Eigen::Lower>() * xv) +
                        qc.c.dot(xv) + qc.d;
        }
        return g;
    };
    // Jacobian rows of the quadratic constraints at the current point.
    auto quad_grad = [&](int k, const Eigen::VectorXd& xv) {
        const auto& qc = problem.quad[k];
        return Eigen::VectorXd(qc.Q.selfadjointView<Eigen::Lower>() * xv + qc.c);
    };

    Eigen::VectorXd g0 = ineq_values(x);
    for (int i = 0; i < mi; ++i) {
        s[i] = std::max(1.0, -g0[i]);
        if (i >= ml && g0[i] >= 0.0) {
            // A quadratic row must start strictly feasible; callers that use
            // them supply such a point.
            Result fail;
            fail.message = "qp::solve: start point violates a quadratic inequality";
            return fail;
        }
        if (i >= ml) s[i] = -g0[i];
    }

    // KKT matrix [Hbar A'; A -delta I] with
    // Hbar = P + sum z_k Q_k + J' diag(z/s) J + delta I.
    const int dim = n + me;
    Eigen::SparseMatrix<double> kkt(dim, dim);
    std::vector<Eigen::Triplet<double>> trips;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;

    const double obj_scale = 1.0 + inf_norm(problem.q);

    Result res;
    Eigen::VectorXd J_dense_row; // scratch for quadratic gradients
    std::vector<Eigen::VectorXd> qgrads(nq);

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        Eigen::VectorXd g = ineq_values(x);
        for (int k = 0; k < nq; ++k) qgrads[k] = quad_grad(k, x);

        // Residuals.
        Eigen::VectorXd r_dual = problem.P.selfadjointView<Eigen::Lower>() * x + problem.q;
        if (me > 0) r_dual += problem.A.transpose() * y;
        if (ml > 0) r_dual += problem.G.transpose() * z.head(ml);
        for (int k = 0; k < nq; ++k) r_dual += z[ml + k] * qgrads[k];
        Eigen::VectorXd r_eq = me > 0 ? Eigen::VectorXd(problem.A * x - problem.b)
                                      : Eigen::VectorXd(0);
        Eigen::VectorXd r_ineq = g + s;
        double mu = mi > 0 ? s.dot(z) / mi : 0.0;

        res.iterations = iter;
        res.gap = mu;
        res.r_dual = inf_norm(r_dual);
        res.r_eq = inf_norm(r_eq);
        res.r_ineq = inf_norm(r_ineq);
        double tol = settings.abs_tol;
        if (res.r_dual <= tol * obj_scale && res.r_eq <= tol && res.r_ineq <= tol &&
            mu <= tol) {
            res.x = x;
            res.y = y;
            res.z = z;
            res.optimal = true;
            res.message = "optimal";
            return res;
        }

        // Assemble the reduced KKT system with diag weights d = z / s.
        Eigen::VectorXd d = z.cwiseQuotient(s);
        trips.clear();
        for (int k = 0; k < problem.P.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(problem.P, k); it; ++it) {
                if (it.row() >= it.col()) trips.emplace_back(it.row(), it.col(), it.value());
            }
        }
        // G' D G stays sparse: each inequality row touches few columns.
        Eigen::SparseMatrix<double> GDG;
        if (ml > 0) {
            Eigen::SparseMatrix<double> Gs = problem.G;
            Eigen::SparseMatrix<double> DG = d.head(ml).asDiagonal() * Gs;
            GDG = Eigen::SparseMatrix<double>(Gs.transpose() * DG);
            for (int c = 0; c < GDG.outerSize(); ++c) {
                for (Eigen::SparseMatrix<double>::InnerIterator it(GDG, c); it; ++it) {
                    if (it.row() >= it.col()) trips.emplace_back(it.row(), it.col(), it.value());
                }
            }
        }
        for (int k = 0; k < nq; ++k) {
            const auto& qc = problem.quad[k];
            double zk = z[ml + k];
            for (int c = 0; c < qc.Q.outerSize(); ++c) {
                for (Eigen::SparseMatrix<double>::InnerIterator it(qc.Q, c); it; ++it) {
                    if (it.row() >= it.col()) trips.emplace_back(it.row(), it.col(), zk * it.value());
                }
            }
            const Eigen::VectorXd& gr = qgrads[k];
            double dk = d[ml + k];
            for (int a = 0; a < n; ++a) {
                if (gr[a] == 0.0) continue;
                for (int bcol = 0; bcol <= a; ++bcol) {
                    if (gr[bcol] == 0.0) continue;
                    trips.emplace_back(a, bcol, dk * gr[a] * gr[bcol]);
                }
            }
        }
        if (me > 0) {
            for (int c = 0; c < problem.A.outerSize(); ++c) {
                for (Eigen::SparseMatrix<double>::InnerIterator it(problem.A, c); it; ++it) {
                    trips.emplace_back(n + it.row(), it.col(), it.value());
                }
            }
        }
        kkt.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseMatrix<double> kkt_true = kkt.selfadjointView<Eigen::Lower>();
        // Factor a statically regularized copy; refinement below targets the
        // true system, so the shift does not limit the attainable accuracy.
        Eigen::SparseMatrix<double> kkt_reg = kkt_true;
        {
            Eigen::VectorXd shift(dim);
            shift.head(n).setConstant(kStaticReg);
            if (me > 0) shift.tail(me).setConstant(-kStaticReg);
            Eigen::SparseMatrix<double> s_diag(dim, dim);
            std::vector<Eigen::Triplet<double>> st;
            for (int i = 0; i < dim; ++i) st.emplace_back(i, i, shift[i]);
            s_diag.setFromTriplets(st.begin(), st.end());
            kkt_reg += s_diag;
        }

        // Quadratic rows contribute a gradient outer product whose pattern
        // moves with the iterate, so the symbolic factorization cannot be
        // reused in that case.
        if (!analyzed || nq > 0) {
            ldlt.analyzePattern(kkt_reg);
            analyzed = true;
        }
        ldlt.factorize(kkt_reg);
        if (ldlt.info() != Eigen::Success) {
            res.message = "qp::solve: KKT factorization failed";
            return res;
        }

        auto solve_kkt = [&](const Eigen::VectorXd& rhs) {
            Eigen::VectorXd sol = ldlt.solve(rhs);
            for (int round = 0; round < 3; ++round) {
                Eigen::VectorXd resid = rhs - kkt_true * sol;
                sol += ldlt.solve(resid);
            }
            return sol;
        };

        auto assemble_rhs = [&](const Eigen::VectorXd& comp_rhs) {
            // comp_rhs is the right-hand side of Z ds + S dz = comp_rhs; the
            // reduced system needs -r_dual - J'(D r_ineq + comp_rhs / s).
            Eigen::VectorXd rhs(dim);
            Eigen::VectorXd top = -r_dual;
            if (ml > 0) top -= problem.G.transpose() * (d.head(ml).cwiseProduct(r_ineq.head(ml)) +
                                                        comp_rhs.head(ml).cwiseQuotient(s.head(ml)));
            for (int k = 0; k < nq; ++k) {
                double w = d[ml + k] * r_ineq[ml + k] + comp_rhs[ml + k] / s[ml + k];
                top -= w * qgrads[k];
            }
            rhs.head(n) = top;
            if (me > 0) rhs.tail(me) = -r_eq;
            return rhs;
        };
        auto recover_dirs = [&](const Eigen::VectorXd& sol, const Eigen::VectorXd& comp_rhs,
                                Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& ds,
                                Eigen::VectorXd& dz) {
            dx = sol.head(n);
            dy = me > 0 ? Eigen::VectorXd(sol.tail(me)) : Eigen::VectorXd(0);
            Eigen::VectorXd Jdx(mi);
            if (ml > 0) Jdx.head(ml) = problem.G * dx;
            for (int k = 0; k < nq; ++k) Jdx[ml + k] = qgrads[k].dot(dx);
            dz = d.cwiseProduct(Jdx + r_ineq) + comp_rhs.cwiseQuotient(s);
            ds = -r_ineq - Jdx;
        };

        // Predictor (affine scaling).
        Eigen::VectorXd comp_aff = -s.cwiseProduct(z);
        Eigen::VectorXd sol = solve_kkt(assemble_rhs(comp_aff));
        Eigen::VectorXd dx_a, dy_a, ds_a, dz_a;
        recover_dirs(sol, comp_aff, dx_a, dy_a, ds_a, dz_a);

        double alpha_p = step_to_boundary(s, ds_a);
        double alpha_d = step_to_boundary(z, dz_a);
        double alpha_aff = std::min(alpha_p, alpha_d);
        double mu_aff = (s + alpha_aff * ds_a).dot(z + alpha_aff * dz_a) / std::max(mi, 1);
        double sigma = mu > 0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // Corrector with Mehrotra second-order term on the linear rows.
        Eigen::VectorXd comp = -(s.cwiseProduct(z) + ds_a.cwiseProduct(dz_a)) +
                               sigma * mu * Eigen::VectorXd::Ones(mi);
        sol = solve_kkt(assemble_rhs(comp));
        Eigen::VectorXd dx, dy, ds, dz;
        recover_dirs(sol, comp, dx, dy, ds, dz);

        // Separate primal and dual step lengths; equal steps let the gap race
        // ahead of dual feasibility on ill-conditioned problems.
        double alpha_pr = std::min(1.0, 0.99 * step_to_boundary(s, ds));
        double alpha_du = std::min(1.0, 0.99 * step_to_boundary(z, dz));
        if (nq > 0) {
            // Quadratic rows couple x into the dual residual; keep steps equal.
            alpha_pr = alpha_du = std::min(alpha_pr, alpha_du);
        }
        if (!std::isfinite(alpha_pr) || !std::isfinite(alpha_du) ||
            std::min(alpha_pr, alpha_du) <= 0.0) {
            res.message = "qp::solve: no progress (step size collapsed)";
            return res;
        }

        x += alpha_pr * dx;
        s += alpha_pr * ds;
        if (me > 0) y += alpha_du * dy;
        z += alpha_du * dz;
        if (!x.allFinite()) {
            res.message = "qp::solve: iterate diverged";
            return res;
        }
    }

    res.x = x;
    res.y = y;
    res.z = z;
    res.message = "qp::solve: iteration limit reached";
    return res;
}

} // namespace rkdopt::qp
