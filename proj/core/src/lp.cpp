#include "protoreg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "protoreg/errors.hpp"

namespace protoreg {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Full-tableau two-phase simplex for
//     min <c, u>  s.t.  A u <= b,  u free.
// Free variables are split u = up - un; slacks close the rows; artificials
// cover rows that start with negative right-hand sides.
class SimplexTableau {
public:
    SimplexTableau(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
        : n_(static_cast<int>(a.cols())), m_(static_cast<int>(a.rows())) {
        scale_ = std::max({1.0, a.cwiseAbs().maxCoeff(), b.size() ? b.cwiseAbs().maxCoeff() : 0.0});
        num_art_ = 0;
        sign_.assign(m_, 1.0);
        for (int i = 0; i < m_; ++i)
            if (b[i] < 0) {
                sign_[i] = -1.0;
                ++num_art_;
            }
        cols_ = 2 * n_ + m_ + num_art_;
        t_.setZero(m_, cols_ + 1);
        basis_.resize(m_);
        int art = 0;
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) {
                t_(i, j) = sign_[i] * a(i, j);
                t_(i, n_ + j) = -sign_[i] * a(i, j);
            }
            t_(i, 2 * n_ + i) = sign_[i];
            t_(i, cols_) = sign_[i] * b[i];
            if (sign_[i] < 0) {
                const int acol = 2 * n_ + m_ + art++;
                t_(i, acol) = 1.0;
                basis_[i] = acol;
            } else {
                basis_[i] = 2 * n_ + i;
            }
        }
        cost_.setZero(cols_);
        for (int j = 0; j < n_; ++j) {
            cost_[j] = c[j];
            cost_[n_ + j] = -c[j];
        }
    }

    enum class Status { optimal, unbounded, infeasible, stalled };

    Status run() {
        if (num_art_ > 0) {
            Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols_);
            for (int j = 2 * n_ + m_; j < cols_; ++j) phase1[j] = 1.0;
            art_barrier_ = cols_;  // artificials may still move in phase 1
            Status s = optimize(phase1);
            if (s == Status::stalled) return s;
            if (objective(phase1) > 1e-9 * scale_) return Status::infeasible;
            drive_out_artificials();
        }
        art_barrier_ = 2 * n_ + m_;  // artificials frozen from here on
        return optimize(cost_);
    }

    Eigen::VectorXd point() const {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(cols_);
        for (int i = 0; i < m_; ++i) full[basis_[i]] = t_(i, cols_);
        Eigen::VectorXd u(n_);
        for (int j = 0; j < n_; ++j) u[j] = full[j] - full[n_ + j];
        return u;
    }

    double objective(const Eigen::VectorXd& cost) const {
        double v = 0.0;
        for (int i = 0; i < m_; ++i) v += cost[basis_[i]] * t_(i, cols_);
        return v;
    }

    // Row multipliers y >= 0 with c + A^T y = 0 at the optimum, read off the
    // reduced costs of the slack columns.
    Eigen::VectorXd duals() const {
        Eigen::VectorXd red = reduced_costs(cost_);
        Eigen::VectorXd y(m_);
        for (int i = 0; i < m_; ++i) y[i] = std::max(0.0, red[2 * n_ + i]);
        return y;
    }

private:
    Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
        Eigen::VectorXd red = cost;
        for (int i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb != 0.0) red -= cb * t_.row(i).head(cols_).transpose();
        }
        return red;
    }

    Status optimize(const Eigen::VectorXd& cost) {
        const long cap = 2000 + 200L * (m_ + cols_);
        for (long iter = 0; iter < cap; ++iter) {
            Eigen::VectorXd red = reduced_costs(cost);
            int enter = -1;
            for (int j = 0; j < art_barrier_; ++j) {
                if (red[j] < -kPivotTol * scale_) {
                    enter = j;  // Bland: first improving index
                    break;
                }
            }
            if (enter < 0) return Status::optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                const double aij = t_(i, enter);
                if (aij > kPivotTol) {
                    const double ratio = t_(i, cols_) / aij;
                    if (ratio < best - 1e-12 || (ratio < best + 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return Status::unbounded;
            pivot(leave, enter);
        }
        return Status::stalled;
    }

    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < 2 * n_ + m_) continue;
            int col = -1;
            for (int j = 0; j < 2 * n_ + m_; ++j)
                if (std::abs(t_(i, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            if (col >= 0) pivot(i, col);
            // Otherwise the row encodes 0 = 0 and stays inert.
        }
    }

    void pivot(int row, int col) {
        t_.row(row) /= t_(row, col);
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = t_(i, col);
            if (f != 0.0) t_.row(i) -= f * t_.row(row);
        }
        basis_[row] = col;
    }

    int n_, m_, cols_, num_art_ = 0;
    int art_barrier_ = 0;
    double scale_;
    Eigen::MatrixXd t_;
    Eigen::VectorXd cost_;
    std::vector<int> basis_;
    std::vector<double> sign_;
};

}  // namespace

LpResult lp_solve(const Eigen::VectorXd& c, const PolyhedronH& p) {
    const int n = p.ambient_dim();
    const int m = p.num_rows();
    if (c.size() != n) throw schema_error("lp_solve: objective dimension mismatch");
    if (n > 320 || m > 1280) throw capability_error("lp_solve: beyond desk-scale dimension caps");
    if (!p.A.allFinite() || (m > 0 && !p.b.allFinite())) throw schema_error("lp_solve: non-finite data");
    if (m == 0) {
        if (c.norm() <= 1e-14) return LpOptimal{0.0, Eigen::VectorXd::Zero(n), Eigen::VectorXd(0)};
        return LpUnbounded{};
    }

    SimplexTableau tab(c, p.A, p.b);
    switch (tab.run()) {
        case SimplexTableau::Status::infeasible:
            return LpInfeasible{};
        case SimplexTableau::Status::unbounded:
            return LpUnbounded{};
        case SimplexTableau::Status::stalled:
            throw numeric_error("degenerate LP, perturb and retry");
        case SimplexTableau::Status::optimal:
            break;
    }

    LpOptimal opt;
    opt.point = tab.point();
    opt.value = c.dot(opt.point);
    opt.dual = tab.duals();

    const double scale = 1.0 + opt.point.lpNorm<Eigen::Infinity>();
    if (!p.feasible(opt.point, kFeasTol * scale))
        throw numeric_error("lp_solve: optimal point violates feasibility beyond tolerance");
    // Complementary slackness certificate.
    const Eigen::VectorXd slack = p.b - p.A * opt.point;
    double comp = 0.0;
    for (int i = 0; i < m; ++i) comp = std::max(comp, std::abs(opt.dual[i] * slack[i]));
    const double stat = (c + p.A.transpose() * opt.dual).lpNorm<Eigen::Infinity>();
    if (comp > 1e-8 * scale * (1.0 + opt.dual.lpNorm<Eigen::Infinity>()) || stat > 1e-8 * (1.0 + c.lpNorm<Eigen::Infinity>()))
        throw numeric_error("lp_solve: optimality certificate residual above tolerance");
    return opt;
}

bool lp_feasible(const PolyhedronH& p) {
    return lp_any_point(p).has_value();
}

std::optional<Eigen::VectorXd> lp_any_point(const PolyhedronH& p) {
    LpResult r = lp_solve(Eigen::VectorXd::Zero(p.ambient_dim()), p);
    if (auto* opt = std::get_if<LpOptimal>(&r)) return opt->point;
    return std::nullopt;
}

Eigen::VectorXd project_point(const PolyhedronH& p, const Eigen::VectorXd& x) {
    const int n = p.ambient_dim();
    const int m = p.num_rows();
    if (x.size() != n) throw schema_error("project_point: dimension mismatch");
    if (m == 0) return x;
    if (p.feasible(x, 1e-12)) return x;

    auto start = lp_any_point(p);
    if (!start) throw capability_error("empty polyhedron");
    Eigen::VectorXd u = *start;

    // Row norms for scaling activity tests.
    Eigen::VectorXd rn(m);
    for (int i = 0; i < m; ++i) rn[i] = std::max(1.0, p.A.row(i).norm());

    std::vector<int> work;
    const long cap = 100L * (m + n + 1);
    for (long iter = 0; iter < cap; ++iter) {
        // Minimizer on the current working face: u* = x - Aw^T lam, Aw u* = bw.
        const int k = static_cast<int>(work.size());
        Eigen::MatrixXd aw(k, n);
        Eigen::VectorXd bw(k);
        for (int i = 0; i < k; ++i) {
            aw.row(i) = p.A.row(work[i]);
            bw[i] = p.b[work[i]];
        }
        Eigen::VectorXd lam(k), ustar;
        if (k == 0) {
            ustar = x;
        } else {
            Eigen::MatrixXd gram = aw * aw.transpose();
            lam = gram.ldlt().solve(aw * x - bw);
            ustar = x - aw.transpose() * lam;
        }

        // Feasibility of the face minimizer against the non-working rows.
        int blocker = -1;
        double alpha = 1.0;
        Eigen::VectorXd d = ustar - u;
        if (d.norm() > 1e-13 * (1.0 + u.norm())) {
            for (int i = 0; i < m; ++i) {
                const double ad = p.A.row(i).dot(d);
                if (ad > kPivotTol * rn[i]) {
                    const double room = p.b[i] - p.A.row(i).dot(u);
                    const double step = room / ad;
                    if (step < alpha - 1e-13) {
                        alpha = std::max(0.0, step);
                        blocker = i;
                    } else if (blocker >= 0 && step < alpha + 1e-13 && i < blocker) {
                        blocker = i;  // smallest-index tiebreak
                    }
                }
            }
        }

        if (blocker < 0) {
            u = ustar;
            // Optimality: all working multipliers nonnegative.
            int drop = -1;
            for (int i = 0; i < k; ++i)
                if (lam[i] < -1e-11 && (drop < 0 || work[i] < work[drop])) drop = i;
            if (drop < 0) return u;
            work.erase(work.begin() + drop);
            continue;
        }

        u += alpha * d;
        // Add the blocking row if independent of the working set.
        Eigen::VectorXd a_new = p.A.row(blocker).transpose();
        Eigen::VectorXd resid = a_new;
        if (!work.empty()) {
            Eigen::MatrixXd awt(n, work.size());
            for (size_t i = 0; i < work.size(); ++i) awt.col(i) = p.A.row(work[i]).transpose();
            resid = a_new - awt * (awt.transpose() * awt).ldlt().solve(awt.transpose() * a_new);
        }
        if (resid.norm() > 1e-9 * rn[blocker]) {
            work.push_back(blocker);
        } else {
            // Degenerate geometry: relieve the working set instead.
            int drop = -1;
            for (size_t i = 0; i < work.size(); ++i)
                if (lam[static_cast<int>(i)] < -1e-11 && (drop < 0 || work[i] < work[drop])) drop = static_cast<int>(i);
            if (drop < 0) throw numeric_error("project_point: degenerate active set");
            work.erase(work.begin() + drop);
        }
    }
    throw numeric_error("project_point: iteration cap exceeded");
}

}  // namespace protoreg
