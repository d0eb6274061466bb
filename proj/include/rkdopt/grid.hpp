#pragma once

#include <utility>
#include <vector>

#include "rkdopt/domain.hpp"

namespace rkdopt {

// Equidistant discretization of the remainder-function argument. Centers span
// exactly [min x, max x]; every observation maps to its nearest center, with
// exact midpoint ties resolved toward the center nearer zero.
struct DiscreteGrid {
    std::vector<double> centers;      // sorted, equidistant
    double h = 0.0;                   // spacing
    std::vector<int> assignment;      // observation index -> grid index
    std::vector<int> bin_counts;      // observations per center
    int cutoff_minus = -1;            // center nearest zero from below (or at zero)
    int cutoff_plus = -1;             // center nearest zero from above (or at zero)

    int num_centers() const { return static_cast<int>(centers.size()); }
    bool zero_is_center() const { return cutoff_minus == cutoff_plus; }
};

// One linear row over (R values at centers, nu): sum_k coeff_k R_k + nu_coeff * nu
// compared against rhs.
struct ConstraintRow {
    std::vector<std::pair<int, double>> r_coeffs;
    double nu_coeff = 0.0;
    double rhs = 0.0;
};

// Discretized description of the remainder class: equality rows pin the
// cutoff-adjacent values to zero; inequality rows bound second central
// differences by nu*h^2; optional shape rows restrict the sign of second or
// first differences.
struct ConstraintSet {
    std::vector<ConstraintRow> eq_rows;    // == rhs
    std::vector<ConstraintRow> ineq_rows;  // <= rhs (after moving nu left, rhs is 0)
    std::vector<ConstraintRow> shape_rows; // <= rhs
};

DiscreteGrid build_grid(const Sample& sample, int num_centers);

// Default center count: min(401, distinct x count + 1) forced odd, floored at 51.
int default_num_centers(const Sample& sample);

ConstraintSet build_constraints(const DiscreteGrid& grid, Shape shape);

} // namespace rkdopt
