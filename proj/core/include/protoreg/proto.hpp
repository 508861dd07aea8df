#pragma once

#include <Eigen/Dense>

#include "protoreg/functions.hpp"

namespace protoreg {

struct ProtoResult {
    bool strict = false;
    // Spectral rank decisions with eigenvalues inside the (1e-10, 1e-8)
    // band are flagged instead of silently classified.
    bool marginal = false;
};

// Strict proto-differentiability of the subgradient mapping at (x, v) via
// the relative-interior characterizations: polyhedral and sublinear members
// test v against ri of the subdifferential, decomposable members pull the
// test back to the multiplier, the PSD indicator uses the rank condition
// rank X + rank V = n, and sum_k_largest reduces to the eigen-block test on
// the exposed face (implementation-defined reduction).
ProtoResult strict_proto_test_detailed(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v);
bool strict_proto_test(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

// Predicted C^1-smoothness of prox_{gamma f} around x + gamma v; by the
// characterization this is exactly the strict proto-differentiability test.
bool prox_c1_predict(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

// Samples graph points (z, mu) of the subdifferential of theta within eps of
// (0, mu_bar) and verifies that every sampled mu stays in ri of both the
// subdifferential at 0 and at z. Requires mu_bar in ri of the base set.
bool ri_stability_scan(const SublinearFn& theta, const Eigen::VectorXd& mu_bar, double eps, int samples);

}  // namespace protoreg
