#include "dpglmb/assignment.hpp"

#include "dpglmb/errors.hpp"

#include <cmath>
#include <limits>

namespace dpglmb {

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<int>(cost.rows());
    const auto m = static_cast<int>(cost.cols());
    if (n > m) throw ContractViolation("solve_assignment: more rows than columns");
    if (!cost.allFinite()) throw ContractViolation("solve_assignment: non-finite cost");
    AssignmentResult result;
    if (n == 0) return result;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is a virtual source.
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(m + 1, 0.0);
    std::vector<int> match(m + 1, 0);  // match[j] = row assigned to column j
    std::vector<int> way(m + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    result.row_to_col.assign(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (match[j] != 0) result.row_to_col[match[j] - 1] = j - 1;
    }
    for (int i = 0; i < n; ++i) result.cost += cost(i, result.row_to_col[i]);
    return result;
}

}  // namespace dpglmb
