#include "protoreg/convex_sets.hpp"

#include <algorithm>
#include <cmath>

#include "protoreg/errors.hpp"

namespace protoreg {

namespace {

// Membership of x in cone(R) with an infinity-norm residual LP.
bool cone_contains(const std::vector<Eigen::VectorXd>& rays, const Eigen::VectorXd& x, double tol) {
    if (x.lpNorm<Eigen::Infinity>() <= tol) return true;
    if (rays.empty()) return false;
    const int n = static_cast<int>(x.size());
    const int nr = static_cast<int>(rays.size());
    // Variables (rho, t): minimize t s.t. |R rho - x| <= t, rho >= 0.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n + nr, nr + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n + nr);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < nr; ++j) {
            a(i, j) = rays[j][i];
            a(n + i, j) = -rays[j][i];
        }
        a(i, nr) = -1.0;
        a(n + i, nr) = -1.0;
        b[i] = x[i];
        b[n + i] = -x[i];
    }
    for (int j = 0; j < nr; ++j) a(2 * n + j, j) = -1.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nr + 1);
    c[nr] = 1.0;
    LpResult r = lp_solve(c, PolyhedronH{a, b});
    auto* opt = std::get_if<LpOptimal>(&r);
    return opt && opt->value <= tol;
}

std::vector<Eigen::VectorXd> normalized_rays(const std::vector<Eigen::VectorXd>& rays) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(rays.size());
    for (const auto& r : rays) {
        const double nrm = r.norm();
        if (nrm > 1e-12) out.push_back(r / nrm);
    }
    return out;
}

}  // namespace

bool FinGenConvex::is_cone(double tol) const {
    for (const auto& v : vertices)
        if (v.lpNorm<Eigen::Infinity>() > tol) return false;
    return true;
}

FinGenConvex FinGenConvex::cone_hull(int n, std::vector<Eigen::VectorXd> generators) {
    FinGenConvex c;
    c.vertices.push_back(Eigen::VectorXd::Zero(n));
    c.rays = std::move(generators);
    return c;
}

FinGenConvex FinGenConvex::from_subspace(const Subspace& s) {
    FinGenConvex c;
    c.vertices.push_back(Eigen::VectorXd::Zero(s.ambient_dim()));
    for (int j = 0; j < s.dim(); ++j) {
        c.rays.push_back(s.basis().col(j));
        c.rays.push_back(-s.basis().col(j));
    }
    return c;
}

FinGenConvex FinGenConvex::box(const Eigen::VectorXd& w) {
    const int n = static_cast<int>(w.size());
    if (n > 16) throw capability_error("FinGenConvex::box: too many sign patterns");
    FinGenConvex c;
    for (long mask = 0; mask < (1L << n); ++mask) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? w[i] : -w[i];
        c.vertices.push_back(v);
    }
    return c;
}

bool fgc_contains(const FinGenConvex& c, const Eigen::VectorXd& p, double tol) {
    const int n = c.ambient_dim();
    if (p.size() != n) throw schema_error("fgc_contains: dimension mismatch");
    const int nv = static_cast<int>(c.vertices.size());
    const auto rays = normalized_rays(c.rays);
    const int nr = static_cast<int>(rays.size());
    if (nv == 0) return cone_contains(rays, p, tol);

    // Variables (lambda, rho, t): minimize t with
    //   |V lambda + R rho - p| <= t, sum lambda = 1, lambda >= 0, rho >= 0.
    const int nvar = nv + nr + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n + 2 + nv + nr, nvar);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n + 2 + nv + nr);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < nv; ++j) {
            a(i, j) = c.vertices[j][i];
            a(n + i, j) = -c.vertices[j][i];
        }
        for (int j = 0; j < nr; ++j) {
            a(i, nv + j) = rays[j][i];
            a(n + i, nv + j) = -rays[j][i];
        }
        a(i, nvar - 1) = -1.0;
        a(n + i, nvar - 1) = -1.0;
        b[i] = p[i];
        b[n + i] = -p[i];
    }
    for (int j = 0; j < nv; ++j) {
        a(2 * n, j) = 1.0;
        a(2 * n + 1, j) = -1.0;
    }
    b[2 * n] = 1.0;
    b[2 * n + 1] = -1.0;
    for (int j = 0; j < nv + nr; ++j) a(2 * n + 2 + j, j) = -1.0;
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(nvar);
    cost[nvar - 1] = 1.0;
    LpResult r = lp_solve(cost, PolyhedronH{a, b});
    auto* opt = std::get_if<LpOptimal>(&r);
    return opt && opt->value <= tol;
}

bool ri_membership(const FinGenConvex& c, const Eigen::VectorXd& p) {
    if (!fgc_contains(c, p, 1e-8)) return false;
    const int n = c.ambient_dim();
    const int nv = static_cast<int>(c.vertices.size());
    const auto rays = normalized_rays(c.rays);
    const int nr = static_cast<int>(rays.size());
    if (nv == 0) throw schema_error("ri_membership: vertex list must be nonempty (cones carry vertex 0)");

    // Rays whose negation stays in the cone span a line; they carry no
    // positivity requirement in the relative-interior representation.
    std::vector<bool> lineal(nr, false);
    for (int j = 0; j < nr; ++j) lineal[j] = cone_contains(rays, -rays[j], 1e-9);

    // Variables (lambda, rho, eps): maximize eps with
    //   V lambda + R rho = p, sum lambda = 1,
    //   lambda_i >= eps, rho_j >= eps (non-lineal) or >= 0 (lineal), eps <= 1.
    // The equality rows are exact; the simplex phase-1 threshold supplies the
    // only feasibility leeway, which keeps boundary points from slipping in.
    const int nvar = nv + nr + 1;
    const int eps_col = nvar - 1;
    const int mrows = 2 * n + 2 + nv + nr + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mrows, nvar);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mrows);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < nv; ++j) {
            a(i, j) = c.vertices[j][i];
            a(n + i, j) = -c.vertices[j][i];
        }
        for (int j = 0; j < nr; ++j) {
            a(i, nv + j) = rays[j][i];
            a(n + i, nv + j) = -rays[j][i];
        }
        b[i] = p[i];
        b[n + i] = -p[i];
    }
    for (int j = 0; j < nv; ++j) {
        a(2 * n, j) = 1.0;
        a(2 * n + 1, j) = -1.0;
    }
    b[2 * n] = 1.0;
    b[2 * n + 1] = -1.0;
    int row = 2 * n + 2;
    for (int j = 0; j < nv; ++j, ++row) {
        a(row, j) = -1.0;
        a(row, eps_col) = 1.0;
    }
    for (int j = 0; j < nr; ++j, ++row) {
        a(row, nv + j) = -1.0;
        if (!lineal[j]) a(row, eps_col) = 1.0;
    }
    a(row, eps_col) = 1.0;
    b[row] = 1.0;

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(nvar);
    cost[eps_col] = -1.0;  // maximize eps
    LpResult r = lp_solve(cost, PolyhedronH{a, b});
    auto* opt = std::get_if<LpOptimal>(&r);
    if (!opt) return false;
    return -opt->value > 1e-9;
}

Subspace affine_hull_directions(const FinGenConvex& c) {
    const int n = c.ambient_dim();
    std::vector<Eigen::VectorXd> dirs;
    if (!c.vertices.empty()) {
        const Eigen::VectorXd& v0 = c.vertices.front();
        for (size_t i = 1; i < c.vertices.size(); ++i) dirs.push_back(c.vertices[i] - v0);
    }
    for (const auto& r : c.rays) dirs.push_back(r);
    Eigen::MatrixXd span(n, static_cast<Eigen::Index>(dirs.size()));
    for (size_t i = 0; i < dirs.size(); ++i) span.col(static_cast<Eigen::Index>(i)) = dirs[i];
    return Subspace::span(n, span);
}

LinealityResult lineality_check(const FinGenConvex& c) {
    if (!c.is_cone(1e-10)) throw schema_error("lineality_check: input set is not a cone");
    const int n = c.ambient_dim();
    const auto rays = normalized_rays(c.rays);
    for (size_t j = 0; j < rays.size(); ++j) {
        if (!cone_contains(rays, -rays[j], 1e-9)) return NotSubspace{c.rays[j]};
    }
    Eigen::MatrixXd span(n, static_cast<Eigen::Index>(rays.size()));
    for (size_t j = 0; j < rays.size(); ++j) span.col(static_cast<Eigen::Index>(j)) = rays[j];
    return Subspace::span(n, span);
}

FinGenConvex normal_cone(const PolyhedronH& p, const Eigen::VectorXd& x) {
    const int n = p.ambient_dim();
    if (x.size() != n) throw schema_error("normal_cone: dimension mismatch");
    FinGenConvex out;
    out.vertices.push_back(Eigen::VectorXd::Zero(n));
    for (int i = 0; i < p.num_rows(); ++i) {
        const double rn = std::max(1.0, p.A.row(i).norm());
        const double res = p.A.row(i).dot(x) - p.b[i];
        if (res > 1e-9 * rn) throw schema_error("normal_cone: point is infeasible");
        if (std::abs(res) <= 1e-9 * rn) out.rays.push_back(p.A.row(i).transpose());
    }
    return out;
}

FinGenConvex polar_cone_generators(const Eigen::MatrixXd& rows, int ambient_dim) {
    const int n = ambient_dim;
    // State: cone = span(lines) + cone(rays), rays kept orthogonal to lines.
    std::vector<Eigen::VectorXd> lines, rays;
    for (int i = 0; i < n; ++i) lines.push_back(Eigen::VectorXd::Unit(n, i));

    auto dedupe = [](std::vector<Eigen::VectorXd>& rs) {
        std::vector<Eigen::VectorXd> kept;
        for (const auto& r : rs) {
            bool dup = false;
            for (const auto& k : kept)
                if (k.dot(r) > 1.0 - 1e-12) {
                    dup = true;
                    break;
                }
            if (!dup) kept.push_back(r);
        }
        rs = std::move(kept);
    };

    for (int k = 0; k < rows.rows(); ++k) {
        Eigen::VectorXd a = rows.row(k).transpose();
        const double an = a.norm();
        if (an <= 1e-12) continue;
        a /= an;

        int pivot = -1;
        double best = 1e-10;
        for (size_t i = 0; i < lines.size(); ++i) {
            const double val = std::abs(a.dot(lines[i]));
            if (val > best) {
                best = val;
                pivot = static_cast<int>(i);
            }
        }
        if (pivot >= 0) {
            Eigen::VectorXd l0 = lines[pivot] / a.dot(lines[pivot]);
            lines.erase(lines.begin() + pivot);
            for (auto& l : lines) l -= a.dot(l) * l0;
            std::vector<Eigen::VectorXd> reduced;
            for (auto& r : rays) {
                Eigen::VectorXd rr = r - a.dot(r) * l0;
                const double nrm = rr.norm();
                if (nrm > 1e-12) reduced.push_back(rr / nrm);
            }
            rays = std::move(reduced);
            Eigen::VectorXd nr = -l0;
            rays.push_back(nr / nr.norm());
            dedupe(rays);
            continue;
        }

        // keep = nonviolating rays; each positive/negative pair contributes
        // the combination on the constraint boundary.
        std::vector<Eigen::VectorXd> keep, pos, neg;
        std::vector<double> pos_v, neg_v;
        for (const auto& r : rays) {
            const double v = a.dot(r);
            if (v > 1e-10)
                pos.push_back(r), pos_v.push_back(v);
            else if (v < -1e-10) {
                neg.push_back(r), neg_v.push_back(v);
                keep.push_back(r);
            } else {
                keep.push_back(r);
            }
        }
        for (size_t ip = 0; ip < pos.size(); ++ip)
            for (size_t in = 0; in < neg.size(); ++in) {
                Eigen::VectorXd w = pos_v[ip] * neg[in] - neg_v[in] * pos[ip];
                const double wn = w.norm();
                if (wn > 1e-12) keep.push_back(w / wn);
            }
        rays = std::move(keep);
        dedupe(rays);
        if (rays.size() > 512) throw capability_error("polar_cone_generators: generator blow-up beyond desk scale");

        // Drop rays that are positive combinations of the others (with the
        // line pairs available), keeping the description minimal.
        if (rays.size() > 1) {
            std::vector<Eigen::VectorXd> minimal;
            for (size_t i = 0; i < rays.size(); ++i) {
                std::vector<Eigen::VectorXd> others;
                for (size_t j = 0; j < rays.size(); ++j)
                    if (j != i) others.push_back(rays[j]);
                for (const auto& l : lines) {
                    others.push_back(l);
                    others.push_back(-l);
                }
                if (!cone_contains(others, rays[i], 1e-10)) minimal.push_back(rays[i]);
            }
            if (!minimal.empty()) rays = std::move(minimal);
        }
    }

    FinGenConvex out;
    out.vertices.push_back(Eigen::VectorXd::Zero(n));
    for (const auto& l : lines) {
        out.rays.push_back(l);
        out.rays.push_back(-l);
    }
    for (const auto& r : rays) out.rays.push_back(r);
    return out;
}

FinGenConvex normal_cone_fgc(const FinGenConvex& c, const Eigen::VectorXd& v) {
    const int n = c.ambient_dim();
    if (v.size() != n) throw schema_error("normal_cone_fgc: dimension mismatch");
    std::vector<Eigen::VectorXd> dirs;
    for (const auto& vert : c.vertices) {
        Eigen::VectorXd d = vert - v;
        if (d.lpNorm<Eigen::Infinity>() > 1e-11 * (1.0 + v.lpNorm<Eigen::Infinity>())) dirs.push_back(d);
    }
    for (const auto& r : c.rays)
        if (r.lpNorm<Eigen::Infinity>() > 1e-12) dirs.push_back(r);
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(dirs.size()), n);
    for (size_t i = 0; i < dirs.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = dirs[i].transpose();
    return polar_cone_generators(rows, n);
}

}  // namespace protoreg
