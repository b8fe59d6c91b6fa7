#include "lp.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace relufd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Normalized {
    std::vector<LinCon> ineqs;
    std::vector<LinCon> eqs;
    bool infeasible = false;
};

Normalized normalize(const std::vector<LinCon>& ineqs, const std::vector<LinCon>& eqs,
                     double tol) {
    Normalized out;
    for (const auto& con : ineqs) {
        double n = con.a.norm();
        if (n < 1e-14) {
            if (con.b < -tol) out.infeasible = true;
            continue;
        }
        out.ineqs.push_back({con.a / n, con.b / n});
    }
    for (const auto& con : eqs) {
        double n = con.a.norm();
        if (n < 1e-14) {
            if (std::abs(con.b) > tol) out.infeasible = true;
            continue;
        }
        out.eqs.push_back({con.a / n, con.b / n});
    }
    return out;
}

// Keep a maximal independent subset of the equalities; detect inconsistency
// (same normal span, incompatible offsets).
bool reduce_eqs(std::vector<LinCon>& eqs, int n) {
    if (eqs.empty()) return true;
    std::vector<LinCon> kept;
    MatrixXd rows(0, n + 1);
    for (const auto& e : eqs) {
        VectorXd aug(n + 1);
        aug.head(n) = e.a;
        aug[n] = e.b;
        if (kept.empty()) {
            kept.push_back(e);
            rows.conservativeResize(1, n + 1);
            rows.row(0) = aug.transpose();
            continue;
        }
        // residual of aug against the row span of kept rows
        MatrixXd Rt = rows.transpose();
        VectorXd proj = Rt * Rt.colPivHouseholderQr().solve(aug);
        VectorXd res = aug - proj;
        if (res.norm() > 1e-10) {
            // also check whether the normal part alone is dependent
            MatrixXd A = rows.leftCols(n).transpose();
            VectorXd pa = A * A.colPivHouseholderQr().solve(e.a);
            if ((e.a - pa).norm() <= 1e-10) return false;   // inconsistent offsets
            kept.push_back(e);
            rows.conservativeResize(rows.rows() + 1, n + 1);
            rows.row(rows.rows() - 1) = aug.transpose();
        }
    }
    eqs = kept;
    return true;
}

bool point_feasible(const std::vector<LinCon>& ineqs, const VectorXd& x, double tol) {
    for (const auto& c : ineqs)
        if (c.a.dot(x) + c.b < -tol) return false;
    return true;
}

}  // namespace

LpResult lp_maximize(const std::vector<LinCon>& ineqs, const std::vector<LinCon>& eqs,
                     const VectorXd& c, double feas_tol) {
    int n = static_cast<int>(c.size());
    LpResult best;
    Normalized nm = normalize(ineqs, eqs, feas_tol);
    if (nm.infeasible) return best;
    if (!reduce_eqs(nm.eqs, n)) return best;
    int ne = static_cast<int>(nm.eqs.size());
    if (ne > n) return best;
    int k = n - ne;
    int m = static_cast<int>(nm.ineqs.size());

    MatrixXd A(n, n);
    VectorXd rhs(n);
    for (int i = 0; i < ne; ++i) {
        A.row(i) = nm.eqs[i].a.transpose();
        rhs[i] = -nm.eqs[i].b;
    }

    auto try_basic = [&](const std::vector<int>& pick) {
        for (int i = 0; i < k; ++i) {
            A.row(ne + i) = nm.ineqs[pick[i]].a.transpose();
            rhs[ne + i] = -nm.ineqs[pick[i]].b;
        }
        Eigen::FullPivLU<MatrixXd> lu(A);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) return;
        VectorXd x = lu.solve(rhs);
        if (!x.allFinite()) return;
        if (!point_feasible(nm.ineqs, x, feas_tol)) return;
        double obj = c.dot(x);
        if (!best.feasible || obj > best.objective + 1e-12) {
            best.feasible = true;
            best.objective = obj;
            best.x = x;
        }
    };

    if (k == 0) {
        std::vector<int> none;
        try_basic(none);
        return best;
    }
    if (m < k) return best;
    // enumerate k-subsets of the inequalities in lexicographic order
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        try_basic(pick);
        int i = k - 1;
        while (i >= 0 && pick[i] == m - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

LpResult chebyshev_center(const std::vector<LinCon>& ineqs, const std::vector<LinCon>& eqs,
                          double feas_tol) {
    int n = 0;
    if (!ineqs.empty()) n = static_cast<int>(ineqs.front().a.size());
    else if (!eqs.empty()) n = static_cast<int>(eqs.front().a.size());
    else throw std::invalid_argument("empty system");

    auto lift = [&](double bump) {
        std::pair<std::vector<LinCon>, std::vector<LinCon>> out;
        for (const auto& c : ineqs) {
            double nn = c.a.norm();
            if (nn < 1e-14) {
                if (c.b < -feas_tol) {
                    // unsatisfiable constant row: force infeasibility
                    VectorXd a = VectorXd::Zero(n + 1);
                    a[n] = 0.0;
                    out.first.push_back({a, -1.0});
                }
                continue;
            }
            VectorXd a(n + 1);
            a.head(n) = c.a / nn;
            a[n] = -1.0;
            out.first.push_back({a, c.b / nn + bump});
        }
        // cap the slack variable so the lifted polytope is bounded in R
        VectorXd cap = VectorXd::Zero(n + 1);
        cap[n] = -1.0;
        out.first.push_back({cap, 1e8});
        for (const auto& c : eqs) {
            VectorXd a(n + 1);
            a.head(n) = c.a;
            a[n] = 0.0;
            out.second.push_back({a, c.b});
        }
        return out;
    };

    VectorXd obj = VectorXd::Zero(n + 1);
    obj[n] = 1.0;
    auto sys = lift(0.0);
    LpResult lifted = lp_maximize(sys.first, sys.second, obj, feas_tol);

    LpResult out;
    auto unpack = [&](const LpResult& L) {
        LpResult r;
        if (L.feasible) {
            r.objective = L.objective;
            r.feasible = L.objective >= -feas_tol;
            r.x = L.x.head(n);
        }
        return r;
    };
    out = unpack(lifted);

    // Borderline systems (slack near zero while the equalities do not pin a
    // unique point) get retried with relaxed right-hand sides.
    int ne_indep = 0;
    {
        Normalized nm = normalize(ineqs, eqs, feas_tol);
        if (reduce_eqs(nm.eqs, n)) ne_indep = static_cast<int>(nm.eqs.size());
    }
    if (lifted.feasible && ne_indep < n && std::abs(lifted.objective) <= 1e-7) {
        auto sys2 = lift(1e-7);
        LpResult retry = lp_maximize(sys2.first, sys2.second, obj, feas_tol);
        LpResult r2 = unpack(retry);
        r2.fragile = true;
        return r2;
    }
    return out;
}

}  // namespace relufd
