#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rkdopt/grid.hpp"
#include "rkdopt/optimizer.hpp"
#include "support/dense_qp.hpp"

using namespace rkdopt;

namespace {

std::vector<double> ones(std::size_t n, double v = 1.0) { return std::vector<double>(n, v); }

Sample forced_design() {
    return Sample::create({-2.0, -1.0, 1.0, 2.0}, {0.0, 0.0, 0.0, 0.0});
}

// Independent reassembly of the discretized dual program as a dense QP,
// mirroring the standard form definition rather than the production code.
struct OracleProblem {
    testqp::DenseQP qp;
    std::vector<int> active;
    std::vector<double> sigma2_center;
    Eigen::VectorXd x0;
    int G = 0;
};

OracleProblem oracle_assemble(const DiscreteGrid& grid, const std::vector<double>& sigma2_obs,
                              const Sample& sample, double L, double kappa, int v) {
    OracleProblem op;
    const int G = grid.num_centers();
    op.G = G;
    std::vector<double> invsum(G, 0.0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        invsum[grid.assignment[i]] += 1.0 / sigma2_obs[i];
    }
    for (int j = 0; j < G; ++j) {
        if (grid.bin_counts[j] > 0) {
            op.active.push_back(j);
            op.sigma2_center.push_back(1.0 / invsum[j]);
        }
    }
    const int A = static_cast<int>(op.active.size());
    const int n = A + 5 + G;
    auto iw = [&](int a) { return a; };
    const int inu = A;
    auto il = [&](int k) { return A + 1 + k; };
    auto ir = [&](int j) { return A + 5 + j; };

    op.qp.P = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < A; ++a) op.qp.P(iw(a), iw(a)) = 0.5 / op.sigma2_center[a];
    op.qp.P(inu, inu) = 0.5 / (kappa * L * L);
    for (int k = 0; k < 4; ++k) op.qp.P(il(k), il(k)) = 1e-10;
    for (int j = 0; j < G; ++j) op.qp.P(ir(j), ir(j)) = 1e-10;

    op.qp.q = Eigen::VectorXd::Zero(n);
    if (v == 1) {
        op.qp.q[il(2)] = 1.0;
        op.qp.q[il(3)] = -1.0;
    } else {
        op.qp.q[il(0)] = 1.0;
        op.qp.q[il(1)] = -1.0;
    }

    ConstraintSet cs = build_constraints(grid, Shape::none);
    int me = A + static_cast<int>(cs.eq_rows.size());
    op.qp.A = Eigen::MatrixXd::Zero(me, n);
    op.qp.b = Eigen::VectorXd::Zero(me);
    for (int a = 0; a < A; ++a) {
        int j = op.active[a];
        double xj = grid.centers[j];
        op.qp.A(a, iw(a)) = -1.0;
        if (xj >= 0.0) {
            op.qp.A(a, il(0)) = 1.0;
            op.qp.A(a, il(2)) = xj;
        } else {
            op.qp.A(a, il(1)) = 1.0;
            op.qp.A(a, il(3)) = xj;
        }
        op.qp.A(a, ir(j)) = 1.0;
    }
    for (std::size_t e = 0; e < cs.eq_rows.size(); ++e) {
        for (auto [j, c] : cs.eq_rows[e].r_coeffs) op.qp.A(A + e, ir(j)) = c;
    }

    int mi = static_cast<int>(cs.ineq_rows.size()) + 1;
    op.qp.G = Eigen::MatrixXd::Zero(mi, n);
    op.qp.h = Eigen::VectorXd::Zero(mi);
    for (std::size_t r = 0; r < cs.ineq_rows.size(); ++r) {
        for (auto [j, c] : cs.ineq_rows[r].r_coeffs) op.qp.G(r, ir(j)) = c;
        op.qp.G(r, inu) = cs.ineq_rows[r].nu_coeff;
    }
    op.qp.G(mi - 1, inu) = -1.0;

    op.x0 = Eigen::VectorXd::Zero(n);
    op.x0[inu] = 1.0;
    return op;
}

// Oracle-side recovery: eq-(4)-style map to observation weights followed by
// the closed-form affine moment correction.
std::vector<double> oracle_recover(const OracleProblem& op, const Eigen::VectorXd& x,
                                   const DiscreteGrid& grid, const Sample& sample,
                                   const std::vector<double>& sigma2_obs, int v) {
    const int A = static_cast<int>(op.active.size());
    std::vector<double> center_w(op.G, 0.0);
    for (int a = 0; a < A; ++a) {
        center_w[op.active[a]] = -x[a] / (2.0 * op.sigma2_center[a]);
    }
    std::vector<double> invsum(op.G, 0.0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        invsum[grid.assignment[i]] += 1.0 / sigma2_obs[i];
    }
    std::vector<double> w(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        int j = grid.assignment[i];
        w[i] = center_w[j] * (1.0 / sigma2_obs[i]) / invsum[j];
    }
    // Moment correction: w <- w - A'(AA')^-1 (Aw - t).
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (sample.x[i] >= 0.0) {
            M(0, i) = 1.0;
            M(1, i) = sample.x[i];
        } else {
            M(2, i) = 1.0;
            M(3, i) = sample.x[i];
        }
    }
    Eigen::Vector4d t;
    if (v == 1) t << 0, 1, 0, -1; else t << 1, 0, -1, 0;
    Eigen::Map<Eigen::VectorXd> wv(w.data(), w.size());
    wv -= M.transpose() * (M * M.transpose()).ldlt().solve(Eigen::VectorXd(M * wv - t));
    return w;
}

} // namespace

TEST_SUITE("optimizer") {

TEST_CASE("forced four-point design recovers the unique feasible weights") {
    Sample s = forced_design();
    for (double kappa : {1.0, 0.25}) {
        for (double L : {1.0, 2.0}) {
            SmoothnessSpec spec{L, 0.0, 1, Shape::none};
            DiscreteGrid grid = build_grid(s, 5);
            DualProblem prob = assemble_dual(grid, aggregate_center_sigma2(grid, ones(4)), spec, kappa);
            DualSolution sol = solve(prob, SolverConfig{});
            WeightSolution ws = recover_weights(sol, prob, s, ones(4));
            CHECK(std::abs(ws.weights[0] - 1.0) < 1e-6);
            CHECK(std::abs(ws.weights[1] + 1.0) < 1e-6);
            CHECK(std::abs(ws.weights[2] + 1.0) < 1e-6);
            CHECK(std::abs(ws.weights[3] - 1.0) < 1e-6);
            // Analytic normalized worst-case bias: 1.5 per side.
            CHECK(std::abs(ws.r - 3.0) < 1e-8);
            WorstCaseBias wcb = worst_case_bias(ws.weights, s.x, L, 1);
            CHECK(std::abs(wcb.max_bias - 3.0 * L) < 1e-8);
        }
    }
}

TEST_CASE("variable count matches 2G + 5 when every center holds data") {
    Sample s = forced_design();
    DiscreteGrid grid = build_grid(s, 5);
    // Pack extra observations so all five centers hold data.
    Sample full = Sample::create({-2.0, -1.0, 1.0, 2.0, 0.1, -0.1, 0.05},
                                 std::vector<double>(7, 0.0));
    DiscreteGrid g2 = build_grid(full, 5);
    int with_data = 0;
    for (int c : g2.bin_counts) with_data += (c > 0);
    REQUIRE(with_data == 5);
    SmoothnessSpec spec{1.0, 0.0, 1, Shape::none};
    DualProblem prob = assemble_dual(g2, aggregate_center_sigma2(g2, ones(7)), spec, 1.0);
    CHECK(prob.num_variables() == 2 * 5 + 5);
    CHECK(static_cast<int>(grid.num_centers()) == 5);
}

TEST_CASE("inequality row count is twice the active stencil count for shape none") {
    Sample s = Sample::create({-0.9, -0.53, -0.11, 0.21, 0.64, 0.97},
                              std::vector<double>(6, 0.0));
    DiscreteGrid grid = build_grid(s, 21);
    ConstraintSet cs = build_constraints(grid, Shape::none);
    CHECK(cs.ineq_rows.size() % 2 == 0);
    CHECK(cs.shape_rows.empty());
}

TEST_CASE("worst-case bias scales linearly in L for fixed weights") {
    Sample s = forced_design();
    std::vector<double> w{1.0, -1.0, -1.0, 1.0};
    double b1 = worst_case_bias(w, s.x, 1.0, 1).max_bias;
    double b7 = worst_case_bias(w, s.x, 7.0, 1).max_bias;
    CHECK(std::abs(b7 - 7.0 * b1) < 1e-12);
}

TEST_CASE("worst-case bias rejects weights violating the moment conditions") {
    std::vector<double> w{1.0, -1.0, -1.0, 0.9};
    std::vector<double> xs{-2.0, -1.0, 1.0, 2.0};
    CHECK_THROWS_AS(worst_case_bias(w, xs, 1.0, 1), InfiniteBiasError);
}

TEST_CASE("bias profile places knots at data points and zero") {
    std::vector<double> w{1.0, -1.0, -1.0, 1.0};
    std::vector<double> xs{-2.0, -1.0, 1.0, 2.0};
    WorstCaseBias wcb = worst_case_bias(w, xs, 1.0, 1);
    REQUIRE(wcb.profile.knots.size() == 5);
    CHECK(wcb.profile.knots[2] == 0.0);
    // w-bar(0) = sum_+ w x = 1, w-bar on [0,1] is constant 1, then 2 - t.
    CHECK(wcb.profile.eval(0.5) == doctest::Approx(1.0));
    CHECK(wcb.profile.eval(1.5) == doctest::Approx(0.5));
    CHECK(wcb.profile.integral_abs == doctest::Approx(3.0));
}

TEST_CASE("moment projection passes through already-feasible weights") {
    Sample s = forced_design();
    SmoothnessSpec spec{1.0, 0.0, 1, Shape::none};
    DiscreteGrid grid = build_grid(s, 9);
    DualProblem prob = assemble_dual(grid, aggregate_center_sigma2(grid, ones(4)), spec, 1.0);
    DualSolution sol = solve(prob, SolverConfig{});
    WeightSolution ws = recover_weights(sol, prob, s, ones(4));
    double sp0 = ws.weights[2] + ws.weights[3];
    double sp1 = ws.weights[2] * 1.0 + ws.weights[3] * 2.0;
    CHECK(std::abs(sp0) < 1e-12);
    CHECK(std::abs(sp1 - 1.0) < 1e-12);
}

TEST_CASE("rescaled weights satisfy the moment conditions to 1e-12 on random designs") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(0.05, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> xs;
        for (int i = 0; i < 15; ++i) xs.push_back(ux(rng));
        for (int i = 0; i < 15; ++i) xs.push_back(-ux(rng));
        std::vector<double> ys(xs.size(), 0.0);
        Sample s = Sample::create(xs, ys);
        std::vector<double> s2(xs.size());
        for (auto& v : s2) v = 0.5 + ux(rng);
        int v = rep % 2;
        SmoothnessSpec spec{2.0, 0.0, v, Shape::none};
        DiscreteGrid grid = build_grid(s, 31);
        DualProblem prob = assemble_dual(grid, aggregate_center_sigma2(grid, s2), spec, 0.6);
        DualSolution sol = solve(prob, SolverConfig{});
        WeightSolution ws = recover_weights(sol, prob, s, s2);
        double sp0 = 0, sp1 = 0, sm0 = 0, sm1 = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] >= 0) {
                sp0 += ws.weights[i];
                sp1 += ws.weights[i] * xs[i];
            } else {
                sm0 += ws.weights[i];
                sm1 += ws.weights[i] * xs[i];
            }
        }
        if (v == 1) {
            CHECK(std::abs(sp0) < 1e-12);
            CHECK(std::abs(sp1 - 1) < 1e-12);
            CHECK(std::abs(sm0) < 1e-12);
            CHECK(std::abs(sm1 + 1) < 1e-12);
        } else {
            CHECK(std::abs(sp0 - 1) < 1e-12);
            CHECK(std::abs(sp1) < 1e-12);
            CHECK(std::abs(sm0 + 1) < 1e-12);
            CHECK(std::abs(sm1) < 1e-12);
        }
    }
}

TEST_CASE("mirror-symmetric designs give mirror-symmetric weights") {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 10; ++i) {
        xs.push_back(0.1 * i);
        xs.push_back(-0.1 * i);
    }
    ys.assign(xs.size(), 0.0);
    Sample s = Sample::create(xs, ys);
    SmoothnessSpec spec{2.0, 0.0, 1, Shape::none};
    DiscreteGrid grid = build_grid(s, 21);
    DualProblem prob = assemble_dual(grid, aggregate_center_sigma2(grid, ones(xs.size())), spec, 0.7);
    DualSolution sol = solve(prob, SolverConfig{});
    WeightSolution ws = recover_weights(sol, prob, s, ones(xs.size()));
    for (int i = 0; i < 10; ++i) {
        CHECK(std::abs(ws.weights[2 * i] - ws.weights[2 * i + 1]) < 1e-6);
    }
}

TEST_CASE("strong duality holds numerically at the solution") {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 8; ++i) {
        xs.push_back(0.11 * i);
        xs.push_back(-0.13 * i);
    }
    ys.assign(xs.size(), 0.0);
    Sample s = Sample::create(xs, ys);
    SmoothnessSpec spec{1.5, 0.0, 1, Shape::none};
    DiscreteGrid grid = build_grid(s, 25);
    std::vector<double> s2 = aggregate_center_sigma2(grid, ones(xs.size(), 0.8));
    DualProblem prob = assemble_dual(grid, s2, spec, 0.4);
    DualSolution sol = solve(prob, SolverConfig{});
    // Primal value from the recovered center weights and dual bias variable
    // equals minus the dual optimum.
    double primal = 0.0;
    for (int a = 0; a < prob.num_active(); ++a) {
        double wj = -sol.w_tilde[a] / (2.0 * prob.sigma2_active[a]);
        primal += wj * wj * prob.sigma2_active[a];
    }
    double r = sol.nu / (2.0 * prob.kappa * spec.L * spec.L);
    primal += prob.kappa * spec.L * spec.L * r * r;
    CHECK(std::abs(primal + sol.objective) <= 1e-6 * std::max(1.0, std::abs(primal)));
}

TEST_CASE("dual-route weights match the dense active-set oracle") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> ux(0.1, 1.9);
    std::uniform_real_distribution<double> us(0.5, 2.0);
    for (int rep = 0; rep < 6; ++rep) {
        int npos = 2 + static_cast<int>(rng() % 3);
        int nneg = 2 + static_cast<int>(rng() % 3);
        std::vector<double> xs;
        for (int i = 0; i < npos; ++i) xs.push_back(ux(rng));
        for (int i = 0; i < nneg; ++i) xs.push_back(-ux(rng));
        std::vector<double> ys(xs.size(), 0.0);
        Sample s = Sample::create(xs, ys);
        std::vector<double> s2(xs.size());
        for (auto& v : s2) v = us(rng);
        double kappa = (rep % 2 == 0) ? 1.0 : 0.3;
        double L = (rep % 3 == 0) ? 1.0 : 2.5;
        int v = rep % 2;
        int G = 9 + 6 * (rep % 3); // 9, 15, 21

        SmoothnessSpec spec{L, 0.0, v, Shape::none};
        DiscreteGrid grid = build_grid(s, G);
        DualProblem prob = assemble_dual(grid, aggregate_center_sigma2(grid, s2), spec, kappa);
        DualSolution sol = solve(prob, SolverConfig{});
        WeightSolution ws = recover_weights(sol, prob, s, s2);

        OracleProblem op = oracle_assemble(grid, s2, s, L, kappa, v);
        testqp::DenseQPResult ores = testqp::active_set_solve(op.qp, op.x0);
        REQUIRE(ores.certified);
        std::vector<double> oracle_w = oracle_recover(op, ores.x, grid, s, s2, v);

        for (std::size_t i = 0; i < xs.size(); ++i) {
            CHECK(std::abs(ws.weights[i] - oracle_w[i]) <= 1e-4);
        }
    }
}

TEST_CASE("cone mode agrees with the direct quadratic mode") {
    std::vector<double> xs{-0.83, -0.41, -0.19, 0.22, 0.47, 0.9};
    Sample s = Sample::create(xs, std::vector<double>(6, 0.0));
    SmoothnessSpec spec{2.0, 0.0, 1, Shape::none};
    DiscreteGrid grid = build_grid(s, 15);
    std::vector<double> cs2 = aggregate_center_sigma2(grid, ones(6));
    DualProblem prob = assemble_dual(grid, cs2, spec, 0.5);

    SolverConfig direct;
    DualSolution a = solve(prob, direct);
    SolverConfig cone;
    cone.mode = SolverMode::socp;
    DualSolution b = solve(prob, cone);

    WeightSolution wa = recover_weights(a, prob, s, ones(6));
    WeightSolution wb = recover_weights(b, prob, s, ones(6));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(std::abs(wa.weights[i] - wb.weights[i]) < 1e-5);
    }
    CHECK(std::abs(a.nu - b.nu) < 1e-5 * (1.0 + std::abs(a.nu)));
}

TEST_CASE("worst-case bias is nondecreasing and variance nonincreasing as kappa falls") {
    std::vector<double> xs, ys;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(0.02, 1.0);
    for (int i = 0; i < 25; ++i) {
        xs.push_back(ux(rng));
        xs.push_back(-ux(rng));
    }
    ys.assign(xs.size(), 0.0);
    Sample s = Sample::create(xs, ys);
    SmoothnessSpec spec{2.0, 0.0, 1, Shape::none};
    DiscreteGrid grid = build_grid(s, 51);
    std::vector<double> cs2 = aggregate_center_sigma2(grid, ones(xs.size(), 0.04));

    double prev_bias = -1.0, prev_var = 1e300;
    for (double kappa : {1.0, 0.3, 0.1, 0.03, 0.01}) {
        DualProblem prob = assemble_dual(grid, cs2, spec, kappa);
        DualSolution sol = solve(prob, SolverConfig{});
        WeightSolution ws = recover_weights(sol, prob, s, ones(xs.size(), 0.04));
        double bias = ws.r * spec.L;
        double var = ws.variance;
        CHECK(bias >= prev_bias - 1e-7);
        CHECK(var <= prev_var + 1e-7);
        prev_bias = bias;
        prev_var = var;
    }
}

TEST_CASE("concavity rows never raise the normalized bias at fixed kappa") {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 12; ++i) {
        xs.push_back(0.08 * i);
        xs.push_back(-0.08 * i);
    }
    ys.assign(xs.size(), 0.0);
    Sample s = Sample::create(xs, ys);
    for (double kappa : {1.0, 0.2}) {
        SmoothnessSpec plain{2.0, 0.0, 1, Shape::none};
        SmoothnessSpec shaped{2.0, 0.0, 1, Shape::concave};
        DiscreteGrid grid = build_grid(s, 25);
        std::vector<double> cs2 = aggregate_center_sigma2(grid, ones(xs.size(), 0.1));
        DualProblem p1 = assemble_dual(grid, cs2, plain, kappa);
        DualProblem p2 = assemble_dual(grid, cs2, shaped, kappa);
        DualSolution s1 = solve(p1, SolverConfig{});
        DualSolution s2 = solve(p2, SolverConfig{});
        double r1 = s1.nu / (2.0 * kappa * 4.0);
        double r2 = s2.nu / (2.0 * kappa * 4.0);
        CHECK(r2 <= r1 + 1e-7);
    }
}

TEST_CASE("optimize_kappa honors the criterion contract") {
    std::vector<double> xs, ys;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(0.02, 1.0);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int i = 0; i < 40; ++i) {
        double x = ux(rng);
        xs.push_back(x);
        ys.push_back(0.3 * x + noise(rng));
        x = -ux(rng);
        xs.push_back(x);
        ys.push_back(-0.2 * x + noise(rng));
    }
    Sample s = Sample::create(xs, ys);
    SmoothnessSpec spec{2.0, 0.0, 1, Shape::none};
    std::vector<double> s2(xs.size(), 0.01);

    OptimizeResult umse = optimize_kappa(s, s2, s2, spec, 0.05, KappaCriterion::umse);
    CHECK(umse.kappa == 1.0);
    OptimizeResult hl = optimize_kappa(s, s2, s2, spec, 0.05, KappaCriterion::half_length);
    CHECK(hl.kappa <= 1.0);
    CHECK(hl.interval.half_length() <= umse.interval.half_length() + 1e-9);

    // Worst-case MSE at the length-optimal weights can never beat kappa = 1.
    double mse_hl = hl.weights.variance + std::pow(hl.weights.r * spec.L, 2);
    double mse_umse = umse.weights.variance + std::pow(umse.weights.r * spec.L, 2);
    CHECK(mse_hl >= mse_umse - 1e-9);
}

TEST_CASE("both criteria coincide on the forced design") {
    Sample s = forced_design();
    SmoothnessSpec spec{1.0, 0.0, 1, Shape::none};
    std::vector<double> s2(4, 1.0);
    OptimizeResult umse = optimize_kappa(s, s2, s2, spec, 0.05, KappaCriterion::umse);
    OptimizeResult hl = optimize_kappa(s, s2, s2, spec, 0.05, KappaCriterion::half_length);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(umse.weights.weights[i] - hl.weights.weights[i]) < 1e-6);
    }
}

TEST_CASE("grid refinement shrinks the estimate deviation at second order") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 30; ++i) {
        double x = -1.0 + (2.0 * i + 1.0) / 30.0;
        if (std::abs(x) < 1e-9) continue;
        xs.push_back(x);
        double curv = -x * x + ((std::abs(x) > 0.15) ? 1.75 * std::pow(std::abs(x) - 0.15, 2) : 0.0);
        ys.push_back((x >= 0 ? -0.5 * x : 0.0) + curv);
    }
    Sample s = Sample::create(xs, ys);
    SmoothnessSpec spec{2.0, 0.0, 1, Shape::none};
    std::vector<double> s2(xs.size(), 0.01);

    auto estimate_at = [&](int G) {
        OptimizeOptions opt;
        opt.grid_points = G;
        return optimize_kappa(s, s2, s2, spec, 0.05, KappaCriterion::umse, opt)
            .interval.estimate;
    };
    double ref = estimate_at(401);
    double dev_coarse = std::abs(estimate_at(26) - ref);
    double dev_fine = std::abs(estimate_at(51) - ref); // h halves: 25 -> 50 intervals
    CHECK(dev_fine <= dev_coarse / 4.0 + 1e-9);
}

TEST_CASE("nu degeneracy is not flagged on healthy designs") {
    Sample s = forced_design();
    SmoothnessSpec spec{2.0, 0.0, 1, Shape::none};
    std::vector<double> s2(4, 1.0);
    OptimizeResult r = optimize_kappa(s, s2, s2, spec, 0.05, KappaCriterion::umse);
    CHECK_FALSE(r.weights.nu_degenerate);
}

TEST_CASE("assemble_dual rejects a zero curvature bound") {
    Sample s = forced_design();
    DiscreteGrid grid = build_grid(s, 9);
    SmoothnessSpec spec{0.0, 0.0, 1, Shape::none};
    CHECK_THROWS_AS(assemble_dual(grid, aggregate_center_sigma2(grid, ones(4)), spec, 1.0),
                    std::invalid_argument);
}

TEST_CASE("problem dump emits the documented triplet sections") {
    Sample s = forced_design();
    DiscreteGrid grid = build_grid(s, 9);
    SmoothnessSpec spec{1.0, 0.0, 1, Shape::none};
    DualProblem prob = assemble_dual(grid, aggregate_center_sigma2(grid, ones(4)), spec, 1.0);
    std::ostringstream oss;
    dump_problem(prob, oss);
    std::string text = oss.str();
    CHECK(text.find("objective-diag") != std::string::npos);
    CHECK(text.find("objective-linear") != std::string::npos);
    CHECK(text.find("eq ") != std::string::npos);
    CHECK(text.find("ineq ") != std::string::npos);
}

} // TEST_SUITE
