#pragma once

#include <Eigen/Dense>
#include <utility>

namespace protoreg {

// Symmetric matrix, symmetrized on entry. Off-symmetry beyond 1e-12 in the
// input is averaged away; the stored matrix satisfies M == M^T exactly.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Eigen::MatrixXd& m);
    static SymMatrix zero(int n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }
    static SymMatrix identity(int n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }

    const Eigen::MatrixXd& mat() const { return m_; }
    int size() const { return static_cast<int>(m_.rows()); }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    Eigen::MatrixXd m_;
};

// Linear subspace of R^n stored by an orthonormal basis (columns).
// dim == 0 encodes the zero subspace with a n x 0 basis.
class Subspace {
public:
    Subspace() : ambient_(0) {}
    // `basis` columns must be orthonormal to 1e-10; throws otherwise.
    Subspace(int ambient_dim, Eigen::MatrixXd basis);

    static Subspace zero(int ambient_dim) { return Subspace(ambient_dim, Eigen::MatrixXd(ambient_dim, 0)); }
    static Subspace full(int ambient_dim) { return Subspace(ambient_dim, Eigen::MatrixXd::Identity(ambient_dim, ambient_dim)); }
    // Orthonormalizes the spanning columns, dropping dependent directions.
    static Subspace span(int ambient_dim, const Eigen::MatrixXd& spanning, double tol = 1e-10);

    int ambient_dim() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXd& basis() const { return basis_; }

    Eigen::VectorXd project(const Eigen::VectorXd& x) const { return basis_ * (basis_.transpose() * x); }
    // Distance of x from the subspace.
    double residual(const Eigen::VectorXd& x) const { return (x - project(x)).norm(); }
    bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
        return residual(x) <= tol * (1.0 + x.norm());
    }

    SymMatrix projector() const { return SymMatrix(basis_ * basis_.transpose()); }
    Subspace orthogonal_complement() const;
    Subspace intersect(const Subspace& other, double tol = 1e-10) const;

private:
    int ambient_;
    Eigen::MatrixXd basis_;
};

struct EigResult {
    Eigen::VectorXd values;   // nonincreasing
    Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) pairs with values[i]
};

// Cyclic Jacobi eigendecomposition for symmetric matrices, n <= 64.
EigResult sym_eig(const SymMatrix& m);

// subspace_ops: the orthogonal projector onto S and an orthonormal basis of
// the orthogonal complement.
struct SubspaceOps {
    SymMatrix projector;
    Subspace complement;
};
SubspaceOps subspace_ops(const Subspace& s);

// Orthonormal basis of the null space of A (vectors x with A x = 0).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double tol = 1e-10);

int matrix_rank(const Eigen::MatrixXd& a, double tol = 1e-10);

// Scaled symmetric vectorization: svec(X)^T svec(Y) == <X, Y> = tr(XY).
// Coordinates run over the lower triangle column-major with sqrt(2) weights
// on the off-diagonal entries.
Eigen::VectorXd svec(const Eigen::MatrixXd& x);
Eigen::MatrixXd unsvec(const Eigen::VectorXd& v);
int svec_dim(int n);     // n (n + 1) / 2
int svec_order(int sd);  // inverse of svec_dim

}  // namespace protoreg
