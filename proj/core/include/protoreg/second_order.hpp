#pragma once

#include <Eigen/Dense>
#include <vector>

#include "protoreg/functions.hpp"
#include "protoreg/linalg.hpp"

namespace protoreg {

// The quadratic bundle (Kbar, Abar) of a strictly proto-differentiable pair:
//   d^2 f(x, v)(w)        = xi^T Abar xi            for w = B xi, +inf off Kbar,
//   D(df)(x, v)(w)        = {B Abar xi} + Kbar^perp for w = B xi, empty off Kbar,
// and the coderivative coincides with the graphical derivative. The smooth
// case is recovered with Kbar = R^n and Abar the Hessian.
struct QuadraticBundle {
    Subspace kbar;
    SymMatrix abar;  // reduced d x d form, d = kbar.dim()

    int ambient_dim() const { return kbar.ambient_dim(); }
    // B Abar B^T w; meaningful for w in Kbar.
    Eigen::VectorXd base_action(const Eigen::VectorXd& w) const {
        return kbar.basis() * (abar.mat() * (kbar.basis().transpose() * w));
    }
    // The symmetric extension B Abar B^T as an ambient operator.
    Eigen::MatrixXd full_operator() const {
        return kbar.basis() * abar.mat() * kbar.basis().transpose();
    }
};

// Second-order difference quotient (f(x + t w) - f(x) - t <v, w>) / (t^2/2).
double quotient(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t,
                const Eigen::VectorXd& w);

struct D2Estimate {
    double value = 0.0;
    bool diverged = false;
};

// Sampled liminf of the second-order quotients: minimizes over shrinking
// balls around w along the t-schedule; flags divergence when the three
// finest scales exceed 1e3 monotonically.
D2Estimate d2_estimate(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                       const Eigen::VectorXd& w, std::vector<double> t_schedule = {},
                       double radius_factor = 10.0);

// Closed-form bundle per function class; requires strict proto-
// differentiability (relative-interior / rank preconditions).
QuadraticBundle d2_bundle(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

struct GraphDerivative {
    bool empty = true;
    Eigen::VectorXd base;  // B Abar xi
    Subspace directions;   // Kbar^perp
};
GraphDerivative graphical_derivative(const QuadraticBundle& b, const Eigen::VectorXd& w);

double d2_value_closed(const QuadraticBundle& b, const Eigen::VectorXd& w);

// Strict twice epi-differentiability of a sublinear function at the origin:
// exactly the relative-interior membership of mu in the base subdifferential.
bool sublinear_sted_test(const SublinearFn& theta, const Eigen::VectorXd& mu);

}  // namespace protoreg
