#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace protoreg {

// Deterministic splitmix64-based generator. Sampling loops across the
// toolkit must reproduce bit-for-bit between runs and between serial and
// parallel execution, so we avoid distribution classes whose output is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // Box-Muller; one value per call keeps the stream simple.
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    Eigen::VectorXd vector(int n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

    Eigen::VectorXd gaussian_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Eigen::VectorXd unit_vector(int n) {
        Eigen::VectorXd v = gaussian_vector(n);
        double nrm = v.norm();
        while (nrm < 1e-12) {
            v = gaussian_vector(n);
            nrm = v.norm();
        }
        return v / nrm;
    }

    Eigen::MatrixXd matrix(int r, int c, double lo, double hi) {
        Eigen::MatrixXd m(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) m(i, j) = uniform(lo, hi);
        return m;
    }

    // Haar-ish random orthogonal matrix via Gram-Schmidt of a Gaussian matrix.
    Eigen::MatrixXd orthogonal(int n) {
        Eigen::MatrixXd g(n, n);
        for (int j = 0; j < n; ++j) g.col(j) = gaussian_vector(n);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < j; ++k) g.col(j) -= g.col(k).dot(g.col(j)) * g.col(k);
            double nrm = g.col(j).norm();
            if (nrm < 1e-12) {
                g.col(j).setZero();
                g(j, j) = 1.0;
                nrm = 1.0;
            }
            g.col(j) /= nrm;
        }
        return g;
    }

    int index(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t state_;
};

}  // namespace protoreg
