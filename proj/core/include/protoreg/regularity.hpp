#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "protoreg/functions.hpp"
#include "protoreg/second_order.hpp"

namespace protoreg {

// Quadratic map spec: psi(x) = M x + q + 1/2 P(x, x) componentwise, with
// exact Jacobian M + [P_k x]_k.
struct QuadMap {
    Eigen::MatrixXd m;            // rows x cols
    Eigen::VectorXd q;            // rows
    std::vector<SymMatrix> quad;  // rows symmetric cols x cols forms; may be empty

    int rows() const { return static_cast<int>(m.rows()); }
    int cols() const { return static_cast<int>(m.cols()); }
    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
    static QuadMap linear(Eigen::MatrixXd mm, Eigen::VectorXd qq) { return QuadMap{std::move(mm), std::move(qq), {}}; }
};

// 0 in psi(x) + df(x).
struct GeneralizedEq {
    QuadMap psi;  // square: rows == cols == ambient dim of f
    FnHandle f;

    int ambient_dim() const { return psi.cols(); }
};

// min phi(x) + g(Phi(x)): phi scalar quadratic via 1/2 x^T H x + c^T x + c0,
// Phi a QuadMap into the argument space of g.
struct QuadScalar {
    SymMatrix h;
    Eigen::VectorXd c;
    double c0 = 0.0;

    double eval(const Eigen::VectorXd& x) const { return 0.5 * x.dot(h.mat() * x) + c.dot(x) + c0; }
    Eigen::VectorXd grad(const Eigen::VectorXd& x) const { return h.mat() * x + c; }
};

struct KKTProblem {
    QuadScalar phi;
    QuadMap big_phi;  // R^n -> R^m
    FnHandle g;       // convex catalog member on R^m

    int primal_dim() const { return big_phi.cols(); }
    int multiplier_dim() const { return big_phi.rows(); }
    Eigen::VectorXd lagrangian_grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    Eigen::MatrixXd lagrangian_hess_xx(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

struct RegularityReport {
    // Point-based criteria computed by independent code paths.
    bool criterion_adjoint = false;     // ker of the reduced transpose is trivial
    bool criterion_range = false;       // reduced matrix has full rank
    bool criterion_surjective = false;  // ambient range matrix has full rank
    bool consistent = false;            // all criteria agree (hard invariant)
    bool metrically_regular = false;
    bool marginal = false;  // smallest singular value near the threshold

    Eigen::MatrixXd mbar;  // reduced matrix B^T J B + Abar
    double sigma_min = 0.0;
    std::optional<Eigen::VectorXd> witness;  // ambient null direction on failure
    std::optional<Eigen::MatrixXd> localization_derivative;
    QuadraticBundle bundle;
};

// Point-based metric regularity of G = psi + df at a solution xbar
// (0 in G(xbar) checked, strict proto-differentiability required).
RegularityReport metric_regularity(const GeneralizedEq& ge, const Eigen::VectorXd& xbar);

// derivative of the Lipschitz single-valued localization at 0:
// B Mbar^{-1} B^T. Requires a metrically regular instance.
Eigen::MatrixXd localization_derivative(const GeneralizedEq& ge, const Eigen::VectorXd& xbar);
Eigen::MatrixXd localization_derivative(const RegularityReport& report);

// Metric regularity and strong metric regularity coincide in this regime;
// the verdict is the metric-regularity verdict.
bool strong_regularity(const GeneralizedEq& ge, const Eigen::VectorXd& xbar);

// Symmetric-Jacobian case: metric regularity, strong metric regularity, and
// strong metric subregularity all coincide. Asserts the graphical-derivative
// injectivity criterion agrees. Throws unless grad psi(xbar) is symmetric.
bool smsr_symmetric(const GeneralizedEq& ge, const Eigen::VectorXd& xbar);

// Tilt stability of xbar (0 in df(xbar), strict proto there): positive
// definiteness of the reduced bundle matrix; vacuously true when Kbar = {0}.
bool tilt_stability(const FnHandle& f, const Eigen::VectorXd& xbar);

// Metric subregularity of df at (xbar, vbar) for convex members: equality of
// ker d^2 f(xbar, vbar) with the tangent cone to (df)^{-1}(vbar) at xbar.
bool metric_subregularity_convex(const FnHandle& f, const Eigen::VectorXd& xbar, const Eigen::VectorXd& vbar);

struct KKTReport {
    bool applicable = false;  // multiplier in the relative interior
    std::string inapplicable_reason;
    double kkt_residual = 0.0;
    Eigen::VectorXd multiplier_mu;
    bool strongly_regular = false;
    // Labels (a)-(d) of the equivalence; printed from the single criterion-(e)
    // computation, asserted identical.
    bool label_smr = false, label_mr = false, label_smsr = false, label_c1_localization = false;
    double sigma_min = 0.0;
    bool marginal = false;
    int system_dim = 0;
    std::optional<Eigen::VectorXd> witness_w;
    std::optional<Eigen::VectorXd> witness_wprime;
};

KKTReport kkt_check(const KKTProblem& p, const Eigen::VectorXd& xbar, const Eigen::VectorXd& ybar);

// Solution-set description of (df)^{-1}(vbar) for the classes where it is
// exactly computable; shared with the oracles module.
struct SolutionSet {
    enum class Kind { hpoly, affine, intervals } kind = Kind::hpoly;
    PolyhedronH hpoly;               // kind == hpoly
    Eigen::VectorXd affine_point;    // kind == affine
    Subspace affine_directions;      // kind == affine
    std::vector<std::pair<double, double>> intervals;  // kind == intervals (1-D)

    double distance(const Eigen::VectorXd& x) const;
    bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
};
SolutionSet subgradient_inverse_set(const FnHandle& f, const Eigen::VectorXd& xbar, const Eigen::VectorXd& vbar);

}  // namespace protoreg
