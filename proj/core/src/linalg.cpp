#include "protoreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "protoreg/errors.hpp"

namespace protoreg {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw schema_error("SymMatrix: input is not square");
    m_ = 0.5 * (m + m.transpose());
}

Subspace::Subspace(int ambient_dim, Eigen::MatrixXd basis) : ambient_(ambient_dim), basis_(std::move(basis)) {
    if (basis_.rows() != ambient_ && basis_.cols() > 0)
        throw schema_error("Subspace: basis row count does not match ambient dimension");
    if (basis_.rows() != ambient_) basis_.resize(ambient_, 0);
    if (basis_.cols() > ambient_) throw schema_error("Subspace: dimension exceeds ambient dimension");
    const int d = static_cast<int>(basis_.cols());
    if (d > 0) {
        Eigen::MatrixXd gram = basis_.transpose() * basis_;
        if ((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
            throw schema_error("Subspace: basis columns are not orthonormal");
    }
}

Subspace Subspace::span(int ambient_dim, const Eigen::MatrixXd& spanning, double tol) {
    if (spanning.cols() == 0) return Subspace::zero(ambient_dim);
    if (spanning.rows() != ambient_dim) throw schema_error("Subspace::span: dimension mismatch");
    // Modified Gram-Schmidt with one reorthogonalization pass.
    Eigen::MatrixXd q(ambient_dim, spanning.cols());
    int d = 0;
    const double drop = tol * std::max(1.0, spanning.cwiseAbs().maxCoeff());
    for (int j = 0; j < spanning.cols(); ++j) {
        Eigen::VectorXd v = spanning.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (int k = 0; k < d; ++k) v -= q.col(k).dot(v) * q.col(k);
        const double nrm = v.norm();
        if (nrm > drop) q.col(d++) = v / nrm;
    }
    return Subspace(ambient_dim, q.leftCols(d));
}

Subspace Subspace::orthogonal_complement() const {
    if (dim() == 0) return Subspace::full(ambient_);
    if (dim() == ambient_) return Subspace::zero(ambient_);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ambient_, ambient_);
    return Subspace(ambient_, q.rightCols(ambient_ - dim()));
}

Subspace Subspace::intersect(const Subspace& other, double tol) const {
    if (ambient_ != other.ambient_) throw schema_error("Subspace::intersect: ambient mismatch");
    // x in S1 cap S2  <=>  x = B1 a = B2 b; solve [B1 -B2] (a;b) = 0.
    if (dim() == 0 || other.dim() == 0) return Subspace::zero(ambient_);
    Eigen::MatrixXd stacked(ambient_, dim() + other.dim());
    stacked << basis_, -other.basis_;
    Eigen::MatrixXd ker = null_space(stacked, tol);
    if (ker.cols() == 0) return Subspace::zero(ambient_);
    Eigen::MatrixXd vecs = basis_ * ker.topRows(dim());
    return Subspace::span(ambient_, vecs, tol);
}

EigResult sym_eig(const SymMatrix& m) {
    const int n = m.size();
    if (n > 64) throw capability_error("sym_eig: order above the desk-scale cap of 64");
    Eigen::MatrixXd a = m.mat();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

    auto off_norm2 = [&a, n]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
        return s;
    };

    const int max_sweeps = 100;
    int sweep = 0;
    while (off_norm2() > 1e-28 * scale * scale * n * n) {
        if (++sweep > max_sweeps)
            throw numeric_error("sym_eig: Jacobi sweeps exceeded cap, off-diagonal residual " +
                                std::to_string(std::sqrt(off_norm2())));
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&a](int i, int j) { return a(i, i) > a(j, j); });

    EigResult out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        Eigen::VectorXd col = v.col(order[k]);
        // Deterministic sign: largest-magnitude component positive.
        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(col[i]) > std::abs(col[imax])) imax = i;
        if (col[imax] < 0) col = -col;
        out.vectors.col(k) = col;
    }
    return out;
}

SubspaceOps subspace_ops(const Subspace& s) {
    return SubspaceOps{s.projector(), s.orthogonal_complement()};
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double tol) {
    if (a.rows() == 0) return Eigen::MatrixXd::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

int matrix_rank(const Eigen::MatrixXd& a, double tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double cutoff = tol * std::max(1.0, sv[0]);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) ++rank;
    return rank;
}

int svec_dim(int n) { return n * (n + 1) / 2; }

int svec_order(int sd) {
    int n = static_cast<int>(std::floor((std::sqrt(8.0 * sd + 1.0) - 1.0) / 2.0 + 0.5));
    if (svec_dim(n) != sd) throw schema_error("svec_order: length is not triangular");
    return n;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    if (x.cols() != n) throw schema_error("svec: input is not square");
    static const double rt2 = std::sqrt(2.0);
    Eigen::VectorXd v(svec_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j) {
        v[k++] = x(j, j);
        for (int i = j + 1; i < n; ++i) v[k++] = rt2 * 0.5 * (x(i, j) + x(j, i));
    }
    return v;
}

Eigen::MatrixXd unsvec(const Eigen::VectorXd& v) {
    const int n = svec_order(static_cast<int>(v.size()));
    static const double inv_rt2 = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd x(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j) {
        x(j, j) = v[k++];
        for (int i = j + 1; i < n; ++i) {
            x(i, j) = x(j, i) = inv_rt2 * v[k++];
        }
    }
    return x;
}

}  // namespace protoreg
