#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "protoreg/convex_sets.hpp"
#include "protoreg/linalg.hpp"
#include "protoreg/lp.hpp"

namespace protoreg {

// g(u) = max_i <c_i, u> + d_i on the domain polyhedron, +infinity outside.
struct PolyhedralFn {
    struct Piece {
        Eigen::VectorXd c;
        double d;
    };
    std::vector<Piece> pieces;
    PolyhedronH domain;

    int ambient_dim() const { return domain.ambient_dim(); }
};

// theta(z) = support function of d0 = conv(V) + cone(R); theta(0) = 0,
// positively homogeneous, proper lsc sublinear by construction.
struct SublinearFn {
    FinGenConvex d0;
    int ambient_dim() const { return d0.ambient_dim(); }
};

// g(u) = base_value + theta(Xi(u)) with the quadratic map
//   Xi_k(u) = J_k (u - ubar) + 1/2 (u - ubar)^T Q_k (u - ubar),
// valid for |u - ubar| <= radius. Xi(ubar) = 0 structurally.
struct DecomposableFn {
    Eigen::VectorXd base_point;
    double base_value = 0.0;
    SublinearFn theta;            // on R^p
    Eigen::MatrixXd jac;          // p x m
    std::vector<SymMatrix> quad;  // p symmetric m x m forms
    double radius = 1.0;

    int ambient_dim() const { return static_cast<int>(base_point.size()); }
    int range_dim() const { return static_cast<int>(jac.rows()); }
};

// Spectral functions of symmetric matrices; the handle works on svec
// coordinates so every operation sees plain vectors.
struct SpectralFn {
    enum class Kind { psd_indicator, sum_k_largest, leading_eig };
    Kind kind = Kind::psd_indicator;
    int order = 0;  // matrix order n
    int k = 1;      // parameter of sum_k_largest / leading_eig

    int ambient_dim() const { return svec_dim(order); }
};

// Convex function on R given by value/derivative oracles; the solution set
// of f' = 0 is supplied explicitly as closed intervals.
struct Custom1DConvex {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::vector<std::pair<double, double>> zero_set;
    std::string name;

    int ambient_dim() const { return 1; }
};

class FnHandle {
public:
    using Rep = std::variant<PolyhedralFn, SublinearFn, DecomposableFn, SpectralFn, Custom1DConvex>;

    explicit FnHandle(Rep rep, double prox_threshold_r = 0.0)
        : rep_(std::move(rep)), prox_r_(prox_threshold_r) {}

    const Rep& rep() const { return rep_; }
    double prox_threshold() const { return prox_r_; }

    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&rep_);
    }

    int ambient_dim() const;
    std::string kind_name() const;

private:
    Rep rep_;
    double prox_r_;  // prox-regularity threshold r; 0 for convex members
};

// ---------------------------------------------------------------------------
// Spectral subdifferential / critical cone descriptions (eigen-block form;
// the PSD normal cone is not finitely generated).

struct SpectralSubdiff {
    SpectralFn::Kind kind = SpectralFn::Kind::psd_indicator;
    Eigen::MatrixXd u;       // eigenbasis of the base matrix X
    Eigen::VectorXd lambda;  // eigenvalues of X, descending
    int rank_x = 0;          // psd_indicator: positive eigenvalue count
    // sum_k_largest exposed-face data on the eigenvalue vector:
    int above = 0;    // entries strictly above the threshold (weight 1)
    int tie_lo = 0;   // half-open tie block [tie_lo, tie_hi)
    int tie_hi = 0;
    int budget = 0;   // trace budget on the tie block
};

bool spectral_subdiff_contains(const SpectralSubdiff& sd, const Eigen::MatrixXd& v, double tol = 1e-8);
bool spectral_subdiff_ri(const SpectralSubdiff& sd, const Eigen::MatrixXd& v, double rank_tol = 1e-8);

// Critical cone of the PSD indicator at (X, V) in eigen-block form. When
// rank_x + rank_v == n it is the subspace {W : U0^T W U0 = 0}.
struct SpectralConeDesc {
    Eigen::MatrixXd u;
    int order = 0;
    int rank_x = 0;
    int rank_v = 0;
    bool is_subspace() const { return rank_x + rank_v == order; }
    Subspace to_subspace_svec() const;
};

using Subdiff = std::variant<FinGenConvex, SpectralSubdiff>;
using CriticalCone = std::variant<FinGenConvex, SpectralConeDesc>;

// ---------------------------------------------------------------------------
// Operations

double value(const FnHandle& f, const Eigen::VectorXd& x);
Subdiff subdifferential(const FnHandle& f, const Eigen::VectorXd& x);
bool contains_subgradient(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                          double tol = 1e-8);
CriticalCone critical_cone(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

// Unique Lagrange multiplier of a reliably decomposable handle: solves
// grad Xi(u)^* mu = y over the affine hull of the face, then verifies
// membership. Throws when y is not a subgradient at u.
Eigen::VectorXd multiplier(const FnHandle& f, const Eigen::VectorXd& u, const Eigen::VectorXd& y);
// Independent LP-feasibility route used to cross-check uniqueness.
Eigen::VectorXd multiplier_lp_route(const FnHandle& f, const Eigen::VectorXd& u, const Eigen::VectorXd& y);

bool nondegeneracy(const FnHandle& f, const Eigen::VectorXd& u);

struct ProxResult {
    Eigen::VectorXd point;
    int tie_multiplicity = 1;  // polyhedral pieces attaining the optimum
};
ProxResult prox_detailed(const FnHandle& f, double gamma, const Eigen::VectorXd& x);
Eigen::VectorXd prox(const FnHandle& f, double gamma, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Helpers shared with the second-order and regularity modules.

// Exposed face of d0 under z, i.e. the subdifferential of the support
// function at z. Throws when z is outside dom theta.
FinGenConvex theta_face(const SublinearFn& th, const Eigen::VectorXd& z);
double theta_value(const SublinearFn& th, const Eigen::VectorXd& z);

Eigen::VectorXd xi_value(const DecomposableFn& g, const Eigen::VectorXd& u);
Eigen::MatrixXd xi_jacobian(const DecomposableFn& g, const Eigen::VectorXd& u);  // p x m
SymMatrix xi_hessian_combo(const DecomposableFn& g, const Eigen::VectorXd& mu);  // sum mu_k Q_k

// l1 norm with positive weights as a PolyhedralFn over all sign patterns.
PolyhedralFn make_weighted_l1(const Eigen::VectorXd& weights);
// Indicator of a subspace as a PolyhedralFn (zero objective, +-row domain).
PolyhedralFn make_subspace_indicator(const Subspace& s);

}  // namespace protoreg
