#include "rkdopt/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rkdopt/normal.hpp"
#include "rkdopt/univariate.hpp"

namespace rkdopt {

namespace {

constexpr double kObjectiveRidge = 1e-10;

bool plus_side(double x) { return x >= 0.0; }

} // namespace

std::vector<double> aggregate_center_sigma2(const DiscreteGrid& grid,
                                            const std::vector<double>& sigma2_per_obs) {
    std::vector<double> inv_sum(grid.num_centers(), 0.0);
    for (std::size_t i = 0; i < sigma2_per_obs.size(); ++i) {
        double s2 = sigma2_per_obs[i];
        if (!(s2 > 0.0)) {
            throw std::invalid_argument("aggregate_center_sigma2: sigma^2 must be positive");
        }
        inv_sum[grid.assignment[i]] += 1.0 / s2;
    }
    std::vector<double> out(grid.num_centers(), 0.0);
    for (int j = 0; j < grid.num_centers(); ++j) {
        if (inv_sum[j] > 0.0) out[j] = 1.0 / inv_sum[j];
    }
    return out;
}

DualProblem assemble_dual(const DiscreteGrid& grid, const std::vector<double>& sigma2_at_centers,
                          const SmoothnessSpec& spec, double kappa) {
    spec.validate();
    if (!(spec.L > 0.0)) {
        throw std::invalid_argument(
            "assemble_dual: a strictly positive curvature bound is required");
    }
    if (!(kappa > 0.0)) {
        throw std::invalid_argument("assemble_dual: kappa must be positive");
    }
    if (static_cast<int>(sigma2_at_centers.size()) != grid.num_centers()) {
        throw std::invalid_argument("assemble_dual: sigma2_at_centers must match the grid");
    }

    DualProblem p;
    p.grid = grid;
    p.spec = spec;
    p.kappa = kappa;
    for (int j = 0; j < grid.num_centers(); ++j) {
        if (grid.bin_counts[j] > 0) {
            if (!(sigma2_at_centers[j] > 0.0)) {
                throw std::invalid_argument(
                    "assemble_dual: sigma^2 must be positive at data-bearing centers");
            }
            p.active.push_back(j);
            p.sigma2_active.push_back(sigma2_at_centers[j]);
        }
    }
    p.constraints = build_constraints(grid, spec.shape);

    const int A = p.num_active();
    const int G = grid.num_centers();
    const int n = p.num_variables();

    qp::Problem& q = p.qp;
    q.n = n;
    q.q = Eigen::VectorXd::Zero(n);
    if (spec.v == 1) {
        q.q[p.idx_lambda(2)] = 1.0;
        q.q[p.idx_lambda(3)] = -1.0;
    } else {
        q.q[p.idx_lambda(0)] = 1.0;
        q.q[p.idx_lambda(1)] = -1.0;
    }

    std::vector<Eigen::Triplet<double>> pt;
    for (int a = 0; a < A; ++a) {
        pt.emplace_back(a, a, 0.5 / p.sigma2_active[a]);
    }
    pt.emplace_back(p.idx_nu(), p.idx_nu(), 0.5 / (kappa * spec.L * spec.L));
    for (int k = 0; k < 4; ++k) pt.emplace_back(p.idx_lambda(k), p.idx_lambda(k), kObjectiveRidge);
    for (int j = 0; j < G; ++j) pt.emplace_back(p.idx_remainder(j), p.idx_remainder(j), kObjectiveRidge);
    q.P.resize(n, n);
    q.P.setFromTriplets(pt.begin(), pt.end());

    // Equalities: one linkage row per data-bearing center, plus the pinned
    // remainder values next to the cutoff.
    std::vector<Eigen::Triplet<double>> at;
    int row = 0;
    for (int a = 0; a < A; ++a, ++row) {
        int j = p.active[a];
        double xj = grid.centers[j];
        double dj = plus_side(xj) ? 1.0 : 0.0;
        at.emplace_back(row, a, -1.0);
        if (dj > 0.0) {
            at.emplace_back(row, p.idx_lambda(0), 1.0);
            if (xj != 0.0) at.emplace_back(row, p.idx_lambda(2), xj);
        } else {
            at.emplace_back(row, p.idx_lambda(1), 1.0);
            at.emplace_back(row, p.idx_lambda(3), xj);
        }
        at.emplace_back(row, p.idx_remainder(j), 1.0);
    }
    for (const ConstraintRow& cr : p.constraints.eq_rows) {
        for (auto [j, c] : cr.r_coeffs) at.emplace_back(row, p.idx_remainder(j), c);
        ++row;
    }
    q.A.resize(row, n);
    q.A.setFromTriplets(at.begin(), at.end());
    q.b = Eigen::VectorXd::Zero(row);

    std::vector<Eigen::Triplet<double>> gt;
    std::vector<double> grhs;
    int grow = 0;
    // Row equilibration: stencil rows carry O(1) remainder coefficients but
    // O(h^2) nu coefficients, which sends their duals to O(1/h^2) on fine
    // grids and stalls the solver. Dividing each row by its largest entry is
    // an equivalent program with O(1) duals.
    auto add_ineq = [&](const ConstraintRow& cr) {
        double scale = std::abs(cr.nu_coeff);
        for (auto [j, c] : cr.r_coeffs) scale = std::max(scale, std::abs(c));
        for (auto [j, c] : cr.r_coeffs) gt.emplace_back(grow, p.idx_remainder(j), c / scale);
        if (cr.nu_coeff != 0.0) gt.emplace_back(grow, p.idx_nu(), cr.nu_coeff / scale);
        grhs.push_back(cr.rhs / scale);
        ++grow;
    };
    for (const ConstraintRow& cr : p.constraints.ineq_rows) add_ineq(cr);
    for (const ConstraintRow& cr : p.constraints.shape_rows) add_ineq(cr);
    gt.emplace_back(grow, p.idx_nu(), -1.0); // nu >= 0
    grhs.push_back(0.0);
    ++grow;
    q.G.resize(grow, n);
    q.G.setFromTriplets(gt.begin(), gt.end());
    q.h = Eigen::Map<Eigen::VectorXd>(grhs.data(), grow);
    return p;
}

namespace {

// Interior point of the inequality system, used to start the cone solve.
Eigen::VectorXd strictly_feasible_point(const DualProblem& p) {
    const DiscreteGrid& grid = p.grid;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p.num_variables());
    x[p.idx_nu()] = 1.0;
    const double eps = grid.h / 10.0;
    auto anchor = [&](int j) {
        return (j <= grid.cutoff_minus) ? grid.centers[grid.cutoff_minus]
                                        : grid.centers[grid.cutoff_plus];
    };
    for (int j = 0; j < grid.num_centers(); ++j) {
        double dx = grid.centers[j] - anchor(j);
        double val = 0.0;
        switch (p.spec.shape) {
            case Shape::none: val = 0.0; break;
            case Shape::concave: val = -0.25 * dx * dx; break;
            case Shape::convex: val = 0.25 * dx * dx; break;
            case Shape::increasing: val = eps * dx; break;
            case Shape::decreasing: val = -eps * dx; break;
        }
        x[p.idx_remainder(j)] = val;
    }
    for (int a = 0; a < p.num_active(); ++a) {
        x[a] = x[p.idx_remainder(p.active[a])];
    }
    return x;
}

DualSolution extract_solution(const DualProblem& p, const Eigen::VectorXd& x, int iterations,
                              bool optimal, const std::string& status) {
    DualSolution s;
    s.nu = x[p.idx_nu()];
    for (int k = 0; k < 4; ++k) s.lambda[k] = x[p.idx_lambda(k)];
    s.w_tilde.resize(p.num_active());
    for (int a = 0; a < p.num_active(); ++a) s.w_tilde[a] = x[a];
    s.r_tilde.resize(p.grid.num_centers());
    for (int j = 0; j < p.grid.num_centers(); ++j) s.r_tilde[j] = x[p.idx_remainder(j)];
    Eigen::VectorXd head = x.head(p.num_variables());
    s.objective = 0.5 * head.dot(p.qp.P.selfadjointView<Eigen::Lower>() * head) +
                  p.qp.q.dot(head);
    s.iterations = iterations;
    s.optimal = optimal;
    s.status = status;
    return s;
}

} // namespace

DualSolution solve(const DualProblem& problem, const SolverConfig& config) {
    qp::Settings settings;
    settings.abs_tol = config.abs_tol;
    settings.rel_tol = config.rel_tol;
    settings.max_iter = config.max_iter;

    qp::Result res;
    if (config.mode == SolverMode::qp_direct) {
        res = qp::solve(problem.qp, settings);
        if (!res.optimal) {
            std::ostringstream oss;
            oss << "dual solve failed (" << res.message << "): iterations=" << res.iterations
                << " gap=" << res.gap << " r_dual=" << res.r_dual << " r_eq=" << res.r_eq
                << " r_ineq=" << res.r_ineq;
            throw SolverFailure(oss.str());
        }
        return extract_solution(problem, res.x, res.iterations, true, res.message);
    }

    // Cone reformulation: linear objective q + d'x with the quadratic form in
    // an epigraph constraint x'Px <= 2q + 1.
    const int n = problem.num_variables();
    qp::Problem cone;
    cone.n = n + 1;
    cone.P.resize(cone.n, cone.n); // linear objective
    cone.q = Eigen::VectorXd::Zero(cone.n);
    cone.q.head(n) = problem.qp.q;
    cone.q[n] = 1.0;
    cone.A.resize(problem.qp.A.rows(), cone.n);
    {
        std::vector<Eigen::Triplet<double>> t;
        for (int c = 0; c < problem.qp.A.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(problem.qp.A, c); it; ++it) {
                t.emplace_back(it.row(), it.col(), it.value());
            }
        }
        cone.A.setFromTriplets(t.begin(), t.end());
    }
    cone.b = problem.qp.b;
    cone.G.resize(problem.qp.G.rows(), cone.n);
    {
        std::vector<Eigen::Triplet<double>> t;
        for (int c = 0; c < problem.qp.G.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(problem.qp.G, c); it; ++it) {
                t.emplace_back(it.row(), it.col(), it.value());
            }
        }
        cone.G.setFromTriplets(t.begin(), t.end());
    }
    cone.h = problem.qp.h;

    qp::QuadInequality qc;
    qc.Q.resize(cone.n, cone.n);
    {
        std::vector<Eigen::Triplet<double>> t;
        for (int c = 0; c < problem.qp.P.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(problem.qp.P, c); it; ++it) {
                t.emplace_back(it.row(), it.col(), it.value());
            }
        }
        qc.Q.setFromTriplets(t.begin(), t.end());
    }
    qc.c = Eigen::VectorXd::Zero(cone.n);
    qc.c[n] = -1.0;
    qc.d = -0.5;
    cone.quad.push_back(std::move(qc));

    Eigen::VectorXd x0(cone.n);
    Eigen::VectorXd feas = strictly_feasible_point(problem);
    x0.head(n) = feas;
    x0[n] = 0.5 * feas.dot(problem.qp.P.selfadjointView<Eigen::Lower>() * feas) + 1.0;
    settings.x0 = x0;

    res = qp::solve(cone, settings);
    if (!res.optimal) {
        std::ostringstream oss;
        oss << "cone solve failed (" << res.message << "): iterations=" << res.iterations
            << " gap=" << res.gap << " r_dual=" << res.r_dual << " r_eq=" << res.r_eq
            << " r_ineq=" << res.r_ineq;
        throw SolverFailure(oss.str());
    }
    return extract_solution(problem, res.x, res.iterations, true, res.message);
}

void dump_problem(const DualProblem& p, std::ostream& os) {
    os << "# dual program, sparse triplet form\n";
    os << "# variables: " << p.num_variables() << " = w~(" << p.num_active() << ") nu lambda(4) R~("
       << p.grid.num_centers() << ")\n";
    const auto& q = p.qp;
    for (int c = 0; c < q.P.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(q.P, c); it; ++it) {
            os << "objective-diag " << it.row() << " " << it.col() << " " << it.value() << "\n";
        }
    }
    for (int i = 0; i < q.q.size(); ++i) {
        if (q.q[i] != 0.0) os << "objective-linear " << i << " " << q.q[i] << "\n";
    }
    for (int c = 0; c < q.A.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(q.A, c); it; ++it) {
            os << "eq " << it.row() << " " << it.col() << " " << it.value() << "\n";
        }
    }
    for (int i = 0; i < q.b.size(); ++i) {
        if (q.b[i] != 0.0) os << "eq-rhs " << i << " " << q.b[i] << "\n";
    }
    for (int c = 0; c < q.G.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(q.G, c); it; ++it) {
            os << "ineq " << it.row() << " " << it.col() << " " << it.value() << "\n";
        }
    }
    for (int i = 0; i < q.h.size(); ++i) {
        if (q.h[i] != 0.0) os << "ineq-rhs " << i << " " << q.h[i] << "\n";
    }
}

namespace {

// Minimum-L2-norm correction moving w onto the order-v moment equalities.
void project_to_moments(std::vector<double>& w, const std::vector<double>& xs, int v) {
    const std::size_t n = w.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (plus_side(xs[i])) {
            A(0, i) = 1.0;
            A(1, i) = xs[i];
        } else {
            A(2, i) = 1.0;
            A(3, i) = xs[i];
        }
    }
    Eigen::Vector4d target;
    if (v == 1) {
        target << 0.0, 1.0, 0.0, -1.0;
    } else {
        target << 1.0, 0.0, -1.0, 0.0;
    }
    Eigen::Map<Eigen::VectorXd> wv(w.data(), n);
    Eigen::Vector4d resid = A * wv - target;
    Eigen::Matrix4d gram = A * A.transpose();
    Eigen::Vector4d mult = gram.ldlt().solve(resid);
    wv -= A.transpose() * mult;
}

} // namespace

WeightSolution recover_weights(const DualSolution& solution, const DualProblem& problem,
                               const Sample& sample, const std::vector<double>& sigma2_per_obs) {
    if (!solution.optimal) {
        throw std::invalid_argument("recover_weights: solver status is not optimal");
    }
    if (sigma2_per_obs.size() != sample.size()) {
        throw std::invalid_argument("recover_weights: sigma2_per_obs must match the sample");
    }
    const DiscreteGrid& grid = problem.grid;
    bool has_plus = false, has_minus = false;
    for (double x : sample.x) (plus_side(x) ? has_plus : has_minus) = true;
    if (!has_plus || !has_minus) {
        throw std::invalid_argument("recover_weights: one side of the cutoff is empty");
    }

    // Center weight w_j = -w~_j / (2 sigma_j^2), split over bin members in
    // proportion to their inverse variances.
    std::vector<double> center_w(grid.num_centers(), 0.0);
    for (int a = 0; a < problem.num_active(); ++a) {
        center_w[problem.active[a]] = -solution.w_tilde[a] / (2.0 * problem.sigma2_active[a]);
    }
    std::vector<double> inv_sum(grid.num_centers(), 0.0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        inv_sum[grid.assignment[i]] += 1.0 / sigma2_per_obs[i];
    }
    WeightSolution ws;
    ws.weights.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        int j = grid.assignment[i];
        ws.weights[i] = center_w[j] * (1.0 / sigma2_per_obs[i]) / inv_sum[j];
    }

    project_to_moments(ws.weights, sample.x, problem.spec.v);

    ws.nu = solution.nu;
    for (int k = 0; k < 4; ++k) ws.lambda[k] = solution.lambda[k];
    ws.kappa = problem.kappa;
    double var = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        var += ws.weights[i] * ws.weights[i] * sigma2_per_obs[i];
    }
    ws.variance = var;
    auto diag = diagnostics(ws.weights);
    ws.wratio_sq = diag.wratio_sq;
    ws.be_ratio = diag.be_ratio;

    WorstCaseBias wcb = worst_case_bias(ws.weights, sample.x, 1.0, problem.spec.v);
    if (problem.spec.shape == Shape::none) {
        ws.r = wcb.profile.integral_abs;
    } else {
        // Shape rows make the adversary class asymmetric: bound the bias by
        // the larger of the two one-sided envelopes.
        ws.r = std::max(wcb.profile.integral_pos, wcb.profile.integral_neg);
    }
    // The dual reports a zero worst-case bias only when the discretized
    // adversary is degenerate; surface it instead of hiding it.
    double range = grid.centers.back() - grid.centers.front();
    double r_dual = solution.nu / (2.0 * problem.kappa * problem.spec.L * problem.spec.L);
    ws.nu_degenerate = r_dual <= 1e-10 * range;
    return ws;
}

WorstCaseBias worst_case_bias(const std::vector<double>& weights, const std::vector<double>& xs,
                              double L, int v) {
    if (weights.size() != xs.size() || weights.empty()) {
        throw std::invalid_argument("worst_case_bias: weights and xs must match");
    }
    if (!(L > 0.0)) {
        throw std::invalid_argument("worst_case_bias: L must be positive");
    }
    double sp0 = 0, sp1 = 0, sm0 = 0, sm1 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (plus_side(xs[i])) {
            sp0 += weights[i];
            sp1 += weights[i] * xs[i];
        } else {
            sm0 += weights[i];
            sm1 += weights[i] * xs[i];
        }
    }
    const double tol = 1e-8;
    bool ok = (v == 1) ? (std::abs(sp0) <= tol && std::abs(sp1 - 1.0) <= tol &&
                          std::abs(sm0) <= tol && std::abs(sm1 + 1.0) <= tol)
                       : (std::abs(sp0 - 1.0) <= tol && std::abs(sp1) <= tol &&
                          std::abs(sm0 + 1.0) <= tol && std::abs(sm1) <= tol);
    if (!ok) {
        throw InfiniteBiasError(
            "worst_case_bias: weights violate the order-" + std::to_string(v) +
            " moment conditions; the worst-case bias is unbounded");
    }

    // Knots: data points plus zero. w-bar is linear between consecutive knots.
    BiasProfile prof;
    prof.knots = xs;
    prof.knots.push_back(0.0);
    std::sort(prof.knots.begin(), prof.knots.end());
    prof.knots.erase(std::unique(prof.knots.begin(), prof.knots.end()), prof.knots.end());
    const std::size_t K = prof.knots.size();
    prof.values.assign(K, 0.0);

    // Right side: sweep t downward accumulating points with x >= t.
    {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (plus_side(xs[i])) order.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] > xs[b]; });
        double sw = 0.0, swx = 0.0;
        std::size_t next = 0;
        for (std::size_t k = K; k-- > 0;) {
            double t = prof.knots[k];
            if (t < 0.0) break;
            while (next < order.size() && xs[order[next]] >= t) {
                sw += weights[order[next]];
                swx += weights[order[next]] * xs[order[next]];
                ++next;
            }
            prof.values[k] = swx - t * sw;
        }
    }
    // Left side: sweep t upward accumulating points with x <= t.
    {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!plus_side(xs[i])) order.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
        double sw = 0.0, swx = 0.0;
        std::size_t next = 0;
        for (std::size_t k = 0; k < K; ++k) {
            double t = prof.knots[k];
            if (t >= 0.0) break;
            while (next < order.size() && xs[order[next]] <= t) {
                sw += weights[order[next]];
                swx += weights[order[next]] * xs[order[next]];
                ++next;
            }
            prof.values[k] = -(swx - t * sw);
        }
    }

    // Exact integration of the piecewise-linear profile, splitting at roots.
    double pos = 0.0, neg = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        double t0 = prof.knots[k], t1 = prof.knots[k + 1];
        double v0 = prof.values[k], v1 = prof.values[k + 1];
        double dt = t1 - t0;
        if (dt <= 0.0) continue;
        if (v0 * v1 >= 0.0) {
            double area = 0.5 * (v0 + v1) * dt;
            if (area >= 0.0) pos += area; else neg -= area;
        } else {
            double tr = dt * v0 / (v0 - v1);
            double a0 = 0.5 * v0 * tr;
            double a1 = 0.5 * v1 * (dt - tr);
            if (a0 >= 0.0) pos += a0; else neg -= a0;
            if (a1 >= 0.0) pos += a1; else neg -= a1;
        }
    }
    prof.integral_pos = pos;
    prof.integral_neg = neg;
    prof.integral_abs = pos + neg;

    WorstCaseBias out;
    out.profile = std::move(prof);
    out.max_bias = L * out.profile.integral_abs;
    return out;
}

OptimizeResult optimize_kappa(const Sample& sample, const std::vector<double>& sigma2_solve,
                              const std::vector<double>& sigma2_report, const SmoothnessSpec& spec,
                              double alpha, KappaCriterion criterion,
                              const OptimizeOptions& options) {
    spec.validate();
    if (sigma2_solve.size() != sample.size() || sigma2_report.size() != sample.size()) {
        throw std::invalid_argument("optimize_kappa: sigma vectors must match the sample");
    }
    int G = options.grid_points > 0 ? options.grid_points : default_num_centers(sample);
    DiscreteGrid grid = build_grid(sample, G);
    std::vector<double> center_s2 = aggregate_center_sigma2(grid, sigma2_solve);

    struct Fit {
        WeightSolution ws;
        double half = 0.0;
        double kappa = 1.0;
    };
    auto fit_at = [&](double kappa) {
        SolverConfig cfg = options.solver;
        cfg.kappa = kappa;
        DualProblem prob = assemble_dual(grid, center_s2, spec, kappa);
        DualSolution sol = solve(prob, cfg);
        Fit f;
        f.kappa = kappa;
        f.ws = recover_weights(sol, prob, sample, sigma2_solve);
        double se = std::sqrt(std::max(f.ws.variance, 0.0));
        double max_bias = f.ws.r * spec.L;
        double se_eff = std::max(se, 1e-14 * (1.0 + max_bias));
        f.half = se_eff * folded_normal_cv(max_bias / se_eff, alpha);
        return f;
    };

    Fit best = fit_at(1.0);
    double kappa_star = 1.0;
    if (criterion == KappaCriterion::half_length) {
        auto [k, half] = brent_minimize([&](double kappa) { return fit_at(kappa).half; },
                                        options.kappa_lo, options.kappa_hi,
                                        options.kappa_rel_tol, 1e-6 * options.kappa_lo, 80);
        if (half < best.half) {
            best = fit_at(k);
            kappa_star = k;
        }
    }

    OptimizeResult res;
    res.kappa = kappa_star;
    res.weights = best.ws;
    res.weights.kappa = kappa_star;

    double estimate = 0.0, var = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        estimate += res.weights.weights[i] * sample.y[i];
        var += res.weights.weights[i] * res.weights.weights[i] * sigma2_report[i];
    }
    res.weights.variance = var;
    double se = std::sqrt(std::max(var, 0.0));
    double max_bias = res.weights.r * spec.L;
    double se_eff = std::max(se, 1e-14 * (1.0 + std::abs(estimate) + max_bias));
    res.interval = build_interval(estimate, se_eff, max_bias, alpha, sample.kink_denominator);
    res.interval.method =
        criterion == KappaCriterion::umse ? "optimized-umse" : "optimized-hl";
    return res;
}

} // namespace rkdopt
