#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "protoreg/linalg.hpp"
#include "protoreg/lp.hpp"

namespace protoreg {

// Finitely generated convex set conv(V) + cone(R).
struct FinGenConvex {
    std::vector<Eigen::VectorXd> vertices;
    std::vector<Eigen::VectorXd> rays;

    int ambient_dim() const {
        if (!vertices.empty()) return static_cast<int>(vertices.front().size());
        if (!rays.empty()) return static_cast<int>(rays.front().size());
        return 0;
    }
    bool is_cone(double tol = 1e-12) const;

    static FinGenConvex point(const Eigen::VectorXd& v) { return FinGenConvex{{v}, {}}; }
    static FinGenConvex cone_hull(int n, std::vector<Eigen::VectorXd> generators);
    static FinGenConvex from_subspace(const Subspace& s);
    // conv of the 2^n sign patterns scaled by w, i.e. the box [-w, w].
    static FinGenConvex box(const Eigen::VectorXd& w);
};

// LP-based membership of p in C, absolute tolerance on the residual.
bool fgc_contains(const FinGenConvex& c, const Eigen::VectorXd& p, double tol = 1e-8);

// Relative-interior membership via the max-min multiplier LP. Returns false
// when p is not a member. Rays whose negation lies in cone(R) carry no
// positivity requirement. Decision threshold 1e-9 on the maximized minimum
// multiplier.
bool ri_membership(const FinGenConvex& c, const Eigen::VectorXd& p);

// Direction space of the affine hull, span({v_i - v_0} u {r_j}).
Subspace affine_hull_directions(const FinGenConvex& c);

struct NotSubspace {
    Eigen::VectorXd witness;
};
using LinealityResult = std::variant<Subspace, NotSubspace>;

// For a cone C (vertices within {0}): decides whether C is a linear
// subspace; witness is a generator whose negation is not in C.
LinealityResult lineality_check(const FinGenConvex& c);

// Normal cone to the H-polyhedron at a feasible point: cone of the active
// rows. Throws if x is infeasible beyond 1e-9.
FinGenConvex normal_cone(const PolyhedronH& p, const Eigen::VectorXd& x);

// Generators of the polar-type cone { w : <a, w> <= 0 for all a in rows }
// by the double-description method (desk scale). Lines are emitted as +-ray
// pairs.
FinGenConvex polar_cone_generators(const Eigen::MatrixXd& rows, int ambient_dim);

// Normal cone N_C(v) to a finitely generated set at a member point, as
// generators (double description on <w, s - v> <= 0 over the generators).
FinGenConvex normal_cone_fgc(const FinGenConvex& c, const Eigen::VectorXd& v);

}  // namespace protoreg
