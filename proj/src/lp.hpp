#pragma once

#include <Eigen/Dense>
#include <vector>

namespace relufd {

// Affine condition a.x + b >= 0 (inequality) or a.x + b == 0 (equality).
struct LinCon {
    Eigen::VectorXd a;
    double b = 0.0;
};

struct LpResult {
    bool feasible = false;
    Eigen::VectorXd x;
    double objective = 0.0;
    bool fragile = false;
};

// Maximize c.x over {x : ineqs hold, eqs hold} by enumerating basic
// solutions.  Intended for n <= 5 variables with bounded feasible sets
// (callers include box constraints).  feas_tol is absolute after row
// normalization.
LpResult lp_maximize(const std::vector<LinCon>& ineqs,
                     const std::vector<LinCon>& eqs,
                     const Eigen::VectorXd& c,
                     double feas_tol = 1e-9);

// Interior point maximizing the minimum normalized slack subject to the
// equalities (Chebyshev-center style).  objective is the attained slack;
// feasible means slack >= -feas_tol.  Borderline systems are re-solved with
// a 1e-7 right-hand-side perturbation and flagged fragile.
LpResult chebyshev_center(const std::vector<LinCon>& ineqs,
                          const std::vector<LinCon>& eqs,
                          double feas_tol = 1e-9);

}  // namespace relufd
