#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>

namespace protoreg {

// H-polyhedron { u : A u <= b }.
struct PolyhedronH {
    Eigen::MatrixXd A;  // m x n
    Eigen::VectorXd b;  // m

    int ambient_dim() const { return static_cast<int>(A.cols()); }
    int num_rows() const { return static_cast<int>(A.rows()); }
    static PolyhedronH whole_space(int n) { return PolyhedronH{Eigen::MatrixXd(0, n), Eigen::VectorXd(0)}; }
    bool feasible(const Eigen::VectorXd& u, double tol = 1e-9) const {
        if (num_rows() == 0) return true;
        return ((A * u - b).array() <= tol).all();
    }
};

struct LpOptimal {
    double value;
    Eigen::VectorXd point;
    Eigen::VectorXd dual;  // multipliers of the rows, >= 0
};
struct LpUnbounded {};
struct LpInfeasible {};
using LpResult = std::variant<LpOptimal, LpUnbounded, LpInfeasible>;

// minimize <c, u> over P. Dense two-phase simplex with Bland's rule.
LpResult lp_solve(const Eigen::VectorXd& c, const PolyhedronH& p);

// Convenience wrappers.
bool lp_feasible(const PolyhedronH& p);
std::optional<Eigen::VectorXd> lp_any_point(const PolyhedronH& p);

// Euclidean projection of x onto P (primal active-set QP). Throws on empty P.
Eigen::VectorXd project_point(const PolyhedronH& p, const Eigen::VectorXd& x);

}  // namespace protoreg
