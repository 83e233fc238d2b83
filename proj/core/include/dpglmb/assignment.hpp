#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dpglmb {

struct AssignmentResult {
    /// row_to_col[i] is the column assigned to row i.
    std::vector<int> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols),
/// solved exactly with the O(n^2 m) shortest augmenting path Hungarian method.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace dpglmb
