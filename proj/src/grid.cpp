#include "rkdopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rkdopt {

namespace {

// A center sitting within rounding fuzz of zero is treated as exactly zero.
bool is_zero_center(double c, double h) { return std::abs(c) <= 1e-9 * h; }

} // namespace

DiscreteGrid build_grid(const Sample& sample, int num_centers) {
    if (num_centers < 5) {
        throw std::invalid_argument("build_grid: num_centers must be at least 5");
    }
    const auto [lo_it, hi_it] = std::minmax_element(sample.x.begin(), sample.x.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo) || !(lo < 0.0) || !(hi > 0.0)) {
        throw std::invalid_argument("build_grid: sample must span both sides of zero");
    }

    DiscreteGrid grid;
    const int G = num_centers;
    grid.h = (hi - lo) / static_cast<double>(G - 1);
    grid.centers.resize(G);
    for (int j = 0; j < G; ++j) {
        grid.centers[j] = lo + grid.h * static_cast<double>(j);
    }
    grid.centers.back() = hi; // guard against accumulated rounding

    grid.assignment.resize(sample.size());
    grid.bin_counts.assign(G, 0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double pos = (sample.x[i] - lo) / grid.h;
        int j = static_cast<int>(std::lround(pos));
        j = std::clamp(j, 0, G - 1);
        // Nearest center, midpoint ties toward the center nearer zero.
        int best = j;
        for (int cand : {j - 1, j + 1}) {
            if (cand < 0 || cand >= G) continue;
            double d_best = std::abs(sample.x[i] - grid.centers[best]);
            double d_cand = std::abs(sample.x[i] - grid.centers[cand]);
            if (d_cand < d_best ||
                (d_cand == d_best && std::abs(grid.centers[cand]) < std::abs(grid.centers[best]))) {
                best = cand;
            }
        }
        grid.assignment[i] = best;
        grid.bin_counts[best] += 1;
    }

    grid.cutoff_minus = -1;
    grid.cutoff_plus = -1;
    for (int j = 0; j < G; ++j) {
        double c = grid.centers[j];
        if (is_zero_center(c, grid.h)) {
            grid.cutoff_minus = j;
            grid.cutoff_plus = j;
            break;
        }
        if (c < 0.0) {
            grid.cutoff_minus = j;
        } else if (grid.cutoff_plus < 0) {
            grid.cutoff_plus = j;
        }
    }
    if (grid.cutoff_minus < 0 || grid.cutoff_plus < 0) {
        throw std::invalid_argument("build_grid: grid does not bracket zero");
    }
    return grid;
}

int default_num_centers(const Sample& sample) {
    std::set<double> distinct(sample.x.begin(), sample.x.end());
    int g = std::min<int>(401, static_cast<int>(distinct.size()) + 1);
    if (g % 2 == 0) g += 1;
    return std::max(g, 51);
}

ConstraintSet build_constraints(const DiscreteGrid& grid, Shape shape) {
    const int G = grid.num_centers();
    const double h2 = grid.h * grid.h;
    ConstraintSet cs;

    // Pin the remainder to zero at the centers adjacent to the cutoff.
    {
        ConstraintRow row;
        row.r_coeffs = {{grid.cutoff_minus, 1.0}};
        cs.eq_rows.push_back(row);
        if (grid.cutoff_plus != grid.cutoff_minus) {
            ConstraintRow row2;
            row2.r_coeffs = {{grid.cutoff_plus, 1.0}};
            cs.eq_rows.push_back(row2);
        }
    }

    // A second-difference stencil at center j is usable when its three
    // centers sit on a single side of zero (a center exactly at zero may
    // anchor either side).
    auto stencil_side = [&](int j) -> int {
        if (j < 1 || j > G - 2) return 0;
        double a = grid.centers[j - 1], b = grid.centers[j + 1];
        bool zl = is_zero_center(a, grid.h), zr = is_zero_center(b, grid.h);
        if ((a > 0.0 || zl) && b > 0.0) return +1;
        if (a < 0.0 && (b < 0.0 || zr)) return -1;
        return 0;
    };

    // Rows are emitted at every usable interior stencil. Restricting them to
    // data-bearing centers breaks the curvature chain across empty bins,
    // which hands the adversary free directions and leaves the dual program
    // unbounded on sparse designs; the endpoints always hold data, so the
    // dense emission costs at most 2(G-2) rows.
    for (int j = 1; j < G - 1; ++j) {
        if (stencil_side(j) == 0) continue;
        ConstraintRow up;   //  (R_{j-1} - 2 R_j + R_{j+1}) <= nu h^2
        up.r_coeffs = {{j - 1, 1.0}, {j, -2.0}, {j + 1, 1.0}};
        up.nu_coeff = -h2;
        cs.ineq_rows.push_back(up);
        ConstraintRow dn = up; // and its negation
        for (auto& [idx, c] : dn.r_coeffs) c = -c;
        cs.ineq_rows.push_back(dn);
    }

    // Pinning alone leaves the per-side remainder slope at the cutoff loose:
    // with zero on the grid the dual is unbounded along it, and a center very
    // close to zero makes it nearly flat. The Taylor bound |R(x)| <= nu x^2/2
    // holds for every member of the class and anchors the slope at the first
    // center beyond each pinned one.
    for (int j : {grid.cutoff_minus - 1, grid.cutoff_plus + 1}) {
        if (j < 0 || j >= G) continue;
        double bound = 0.5 * grid.centers[j] * grid.centers[j];
        ConstraintRow up;
        up.r_coeffs = {{j, 1.0}};
        up.nu_coeff = -bound;
        cs.ineq_rows.push_back(up);
        ConstraintRow dn;
        dn.r_coeffs = {{j, -1.0}};
        dn.nu_coeff = -bound;
        cs.ineq_rows.push_back(dn);
    }

    if (shape == Shape::concave || shape == Shape::convex) {
        const double sign = (shape == Shape::concave) ? 1.0 : -1.0;
        for (int j = 1; j < G - 1; ++j) {
            if (stencil_side(j) == 0) continue;
            ConstraintRow row; // sign * (R_{j-1} - 2 R_j + R_{j+1}) <= 0
            row.r_coeffs = {{j - 1, sign}, {j, -2.0 * sign}, {j + 1, sign}};
            cs.shape_rows.push_back(row);
        }
    } else if (shape == Shape::increasing || shape == Shape::decreasing) {
        const double sign = (shape == Shape::increasing) ? 1.0 : -1.0;
        for (int j = 0; j + 2 < G; ++j) {
            double a = grid.centers[j], b = grid.centers[j + 2];
            bool one_side = (a >= 0.0 && b > 0.0) || (a < 0.0 && b <= 0.0) ||
                            (is_zero_center(a, grid.h) && b > 0.0) ||
                            (a < 0.0 && is_zero_center(b, grid.h));
            if (!one_side) continue;
            ConstraintRow row; // sign * (R_j - R_{j+2}) <= 0
            row.r_coeffs = {{j, sign}, {j + 2, -sign}};
            cs.shape_rows.push_back(row);
        }
    }

    return cs;
}

} // namespace rkdopt
