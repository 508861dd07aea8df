#include "protoreg/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "protoreg/errors.hpp"

namespace protoreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double scale_of(const Eigen::VectorXd& x) { return 1.0 + x.lpNorm<Eigen::Infinity>(); }

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol = 1e-12) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - tol) return true;
        if (a[i] > b[i] + tol) return false;
    }
    return false;
}

struct SpectralEig {
    Eigen::MatrixXd u;
    Eigen::VectorXd lambda;
};

SpectralEig spectral_decompose(const SpectralFn& sf, const Eigen::VectorXd& x) {
    if (x.size() != sf.ambient_dim()) throw schema_error("spectral handle: svec length mismatch");
    EigResult e = sym_eig(SymMatrix(unsvec(x)));
    return SpectralEig{e.vectors, e.values};
}

// Exposed-face data of the sum-of-k-largest symmetric gauge at the sorted
// eigenvalue vector.
struct SumKFace {
    int above;
    int tie_lo, tie_hi;
    int budget;
};

SumKFace sum_k_face(const Eigen::VectorXd& lambda, int k, double tol) {
    const int n = static_cast<int>(lambda.size());
    const double thresh = lambda[k - 1];
    int above = 0;
    while (above < n && lambda[above] > thresh + tol) ++above;
    int tie_hi = above;
    while (tie_hi < n && lambda[tie_hi] >= thresh - tol) ++tie_hi;
    return SumKFace{above, above, tie_hi, k - above};
}

// Equal-eigenvalue group containing lambda_{i} (1-based i), together with
// the count of group members ranked at or before i.
struct EigGroup {
    int lo, hi;  // half-open group range
    int leading_count;
};

EigGroup eigenvalue_group(const Eigen::VectorXd& lambda, int i, double tol) {
    const double val = lambda[i - 1];
    int lo = i - 1;
    while (lo > 0 && lambda[lo - 1] <= val + tol) --lo;
    int hi = i;
    const int n = static_cast<int>(lambda.size());
    while (hi < n && lambda[hi] >= val - tol) ++hi;
    return EigGroup{lo, hi, i - lo};
}

double piece_value(const PolyhedralFn& g, const Eigen::VectorXd& x) {
    double best = -kInf;
    for (const auto& p : g.pieces) best = std::max(best, p.c.dot(x) + p.d);
    return best;
}

}  // namespace

int FnHandle::ambient_dim() const {
    return std::visit([](const auto& g) { return g.ambient_dim(); }, rep_);
}

std::string FnHandle::kind_name() const {
    if (get_if<PolyhedralFn>()) return "polyhedral";
    if (get_if<SublinearFn>()) return "sublinear";
    if (get_if<DecomposableFn>()) return "decomposable";
    if (const auto* sf = get_if<SpectralFn>()) {
        switch (sf->kind) {
            case SpectralFn::Kind::psd_indicator: return "spectral:psd_indicator";
            case SpectralFn::Kind::sum_k_largest: return "spectral:sum_k_largest";
            case SpectralFn::Kind::leading_eig: return "spectral:leading_eig";
        }
    }
    return "custom1d";
}

// ---------------------------------------------------------------------------
// theta helpers

double theta_value(const SublinearFn& th, const Eigen::VectorXd& z) {
    if (z.size() != th.ambient_dim()) throw schema_error("theta: dimension mismatch");
    const double s = scale_of(z);
    for (const auto& r : th.d0.rays)
        if (z.dot(r) > 1e-12 * s * (1.0 + r.norm())) return kInf;
    double best = -kInf;
    for (const auto& v : th.d0.vertices) best = std::max(best, z.dot(v));
    if (th.d0.vertices.empty()) best = 0.0;  // pure cone: support is 0 on the polar
    return best;
}

FinGenConvex theta_face(const SublinearFn& th, const Eigen::VectorXd& z) {
    const double val = theta_value(th, z);
    if (!std::isfinite(val)) throw capability_error("empty subdifferential outside domain");
    const double tol = 1e-9 * (1.0 + std::abs(val)) + 1e-9 * z.lpNorm<Eigen::Infinity>();
    FinGenConvex face;
    for (const auto& v : th.d0.vertices)
        if (z.dot(v) >= val - tol) face.vertices.push_back(v);
    for (const auto& r : th.d0.rays)
        if (std::abs(z.dot(r)) <= tol * (1.0 + r.norm())) face.rays.push_back(r);
    if (face.vertices.empty()) face.vertices.push_back(Eigen::VectorXd::Zero(th.ambient_dim()));
    return face;
}

// ---------------------------------------------------------------------------
// decomposable helpers

Eigen::VectorXd xi_value(const DecomposableFn& g, const Eigen::VectorXd& u) {
    const Eigen::VectorXd d = u - g.base_point;
    Eigen::VectorXd z = g.jac * d;
    for (int kk = 0; kk < g.range_dim(); ++kk) z[kk] += 0.5 * d.dot(g.quad[kk].mat() * d);
    return z;
}

Eigen::MatrixXd xi_jacobian(const DecomposableFn& g, const Eigen::VectorXd& u) {
    const Eigen::VectorXd d = u - g.base_point;
    Eigen::MatrixXd j = g.jac;
    for (int kk = 0; kk < g.range_dim(); ++kk) j.row(kk) += (g.quad[kk].mat() * d).transpose();
    return j;
}

SymMatrix xi_hessian_combo(const DecomposableFn& g, const Eigen::VectorXd& mu) {
    const int m = g.ambient_dim();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    for (int kk = 0; kk < g.range_dim(); ++kk) h += mu[kk] * g.quad[kk].mat();
    return SymMatrix(h);
}

// ---------------------------------------------------------------------------
// value

double value(const FnHandle& f, const Eigen::VectorXd& x) {
    if (x.size() != f.ambient_dim()) throw schema_error("value: dimension mismatch");
    if (const auto* g = f.get_if<PolyhedralFn>()) {
        if (!g->domain.feasible(x, 1e-9 * scale_of(x))) return kInf;
        return piece_value(*g, x);
    }
    if (const auto* th = f.get_if<SublinearFn>()) return theta_value(*th, x);
    if (const auto* g = f.get_if<DecomposableFn>()) {
        const double tv = theta_value(g->theta, xi_value(*g, x));
        return std::isfinite(tv) ? g->base_value + tv : kInf;
    }
    if (const auto* sf = f.get_if<SpectralFn>()) {
        SpectralEig e = spectral_decompose(*sf, x);
        const double s = 1.0 + e.lambda.cwiseAbs().maxCoeff();
        switch (sf->kind) {
            // The indicator tolerance must stay well below the t^2-order
            // corrections that second-order quotients probe.
            case SpectralFn::Kind::psd_indicator:
                return e.lambda[sf->order - 1] >= -1e-11 * s ? 0.0 : kInf;
            case SpectralFn::Kind::sum_k_largest:
                return e.lambda.head(sf->k).sum();
            case SpectralFn::Kind::leading_eig: {
                EigGroup grp = eigenvalue_group(e.lambda, sf->k, 1e-8 * s);
                return e.lambda.segment(grp.lo, grp.leading_count).sum();
            }
        }
    }
    const auto* c = f.get_if<Custom1DConvex>();
    return c->value(x[0]);
}

// ---------------------------------------------------------------------------
// subdifferential

Subdiff subdifferential(const FnHandle& f, const Eigen::VectorXd& x) {
    if (x.size() != f.ambient_dim()) throw schema_error("subdifferential: dimension mismatch");
    if (const auto* g = f.get_if<PolyhedralFn>()) {
        if (!g->domain.feasible(x, 1e-9 * scale_of(x)))
            throw capability_error("empty subdifferential outside domain");
        const double val = piece_value(*g, x);
        const double tol = 1e-9 * (1.0 + std::abs(val));
        FinGenConvex sd;
        for (const auto& p : g->pieces)
            if (p.c.dot(x) + p.d >= val - tol) sd.vertices.push_back(p.c);
        FinGenConvex nc = normal_cone(g->domain, x);
        sd.rays = nc.rays;
        return sd;
    }
    if (const auto* th = f.get_if<SublinearFn>()) return theta_face(*th, x);
    if (const auto* g = f.get_if<DecomposableFn>()) {
        FinGenConvex face = theta_face(g->theta, xi_value(*g, x));
        const Eigen::MatrixXd jt = xi_jacobian(*g, x).transpose();  // m x p
        FinGenConvex sd;
        for (const auto& v : face.vertices) sd.vertices.push_back(jt * v);
        for (const auto& r : face.rays) {
            Eigen::VectorXd img = jt * r;
            if (img.lpNorm<Eigen::Infinity>() > 1e-13) sd.rays.push_back(img);
        }
        return sd;
    }
    if (const auto* sf = f.get_if<SpectralFn>()) {
        SpectralEig e = spectral_decompose(*sf, x);
        const double s = 1.0 + e.lambda.cwiseAbs().maxCoeff();
        SpectralSubdiff sd;
        sd.kind = sf->kind;
        sd.u = e.u;
        sd.lambda = e.lambda;
        switch (sf->kind) {
            case SpectralFn::Kind::psd_indicator: {
                if (e.lambda[sf->order - 1] < -1e-8 * s)
                    throw capability_error("empty subdifferential outside domain");
                int r = 0;
                while (r < sf->order && e.lambda[r] > 1e-8 * s) ++r;
                sd.rank_x = r;
                return sd;
            }
            case SpectralFn::Kind::sum_k_largest: {
                SumKFace face = sum_k_face(e.lambda, sf->k, 1e-8 * s);
                sd.above = face.above;
                sd.tie_lo = face.tie_lo;
                sd.tie_hi = face.tie_hi;
                sd.budget = face.budget;
                return sd;
            }
            case SpectralFn::Kind::leading_eig: {
                EigGroup grp = eigenvalue_group(e.lambda, sf->k, 1e-8 * s);
                sd.above = 0;
                sd.tie_lo = grp.lo;
                sd.tie_hi = grp.hi;
                sd.budget = grp.leading_count;
                return sd;
            }
        }
    }
    const auto* c = f.get_if<Custom1DConvex>();
    FinGenConvex pt;
    pt.vertices.push_back(Eigen::VectorXd::Constant(1, c->deriv(x[0])));
    return pt;
}

bool spectral_subdiff_contains(const SpectralSubdiff& sd, const Eigen::MatrixXd& v, double tol) {
    const int n = static_cast<int>(sd.u.rows());
    const Eigen::MatrixXd w = sd.u.transpose() * v * sd.u;
    const double s = 1.0 + v.cwiseAbs().maxCoeff();
    if (sd.kind == SpectralFn::Kind::psd_indicator) {
        const int r = sd.rank_x;
        if (r > 0 && w.topLeftCorner(r, r).cwiseAbs().maxCoeff() > tol * s) return false;
        if (r > 0 && r < n && w.topRightCorner(r, n - r).cwiseAbs().maxCoeff() > tol * s) return false;
        if (r < n) {
            EigResult be = sym_eig(SymMatrix(w.bottomRightCorner(n - r, n - r)));
            if (be.values[0] > tol * s) return false;
        }
        return true;
    }
    // sum_k_largest / leading_eig: identity block, zero block, tie block in
    // the Fantope slice {0 <= M <= I, tr M = budget}.
    const int a = sd.above, lo = sd.tie_lo, hi = sd.tie_hi;
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(n, n);
    target.topLeftCorner(a, a).setIdentity();
    Eigen::MatrixXd resid = w - target;
    // Everything outside the tie block must match the forced pattern.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const bool in_tie = (i >= lo && i < hi && j >= lo && j < hi);
            if (!in_tie && std::abs(resid(i, j)) > tol * s) return false;
        }
    const int b = hi - lo;
    if (b == 0) return true;
    Eigen::MatrixXd tie = w.block(lo, lo, b, b);
    EigResult te = sym_eig(SymMatrix(tie));
    if (te.values[0] > 1.0 + tol * s || te.values[b - 1] < -tol * s) return false;
    return std::abs(tie.trace() - sd.budget) <= tol * s * b;
}

bool spectral_subdiff_ri(const SpectralSubdiff& sd, const Eigen::MatrixXd& v, double rank_tol) {
    if (!spectral_subdiff_contains(sd, v, 1e-8)) return false;
    const int n = static_cast<int>(sd.u.rows());
    const Eigen::MatrixXd w = sd.u.transpose() * v * sd.u;
    const double s = 1.0 + v.cwiseAbs().maxCoeff();
    if (sd.kind == SpectralFn::Kind::psd_indicator) {
        const int r = sd.rank_x;
        if (r == n) return true;  // subdifferential is {0}
        EigResult be = sym_eig(SymMatrix(w.bottomRightCorner(n - r, n - r)));
        return be.values[0] < -rank_tol * s;  // negative definite kernel block
    }
    const int lo = sd.tie_lo, hi = sd.tie_hi, b = hi - lo;
    if (b == 0) return true;
    Eigen::MatrixXd tie = w.block(lo, lo, b, b);
    if (sd.budget == b)  // singleton face
        return (tie - Eigen::MatrixXd::Identity(b, b)).cwiseAbs().maxCoeff() <= 1e-8 * s;
    EigResult te = sym_eig(SymMatrix(tie));
    return te.values[0] < 1.0 - rank_tol && te.values[b - 1] > rank_tol;
}

bool contains_subgradient(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double tol) {
    if (v.size() != f.ambient_dim()) throw schema_error("contains_subgradient: dimension mismatch");
    Subdiff sd = subdifferential(f, x);
    if (const auto* fgc = std::get_if<FinGenConvex>(&sd)) return fgc_contains(*fgc, v, tol);
    return spectral_subdiff_contains(std::get<SpectralSubdiff>(sd), unsvec(v), tol);
}

// ---------------------------------------------------------------------------
// critical cone

Subspace SpectralConeDesc::to_subspace_svec() const {
    if (!is_subspace())
        throw capability_error("SpectralConeDesc: critical cone is not a subspace (rank condition fails)");
    const int n = order;
    const int r = rank_x;
    static const double rt2inv = 1.0 / std::sqrt(2.0);
    const int dim = r * (r + 1) / 2 + r * (n - r);
    Eigen::MatrixXd basis(svec_dim(n), dim);
    int col = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            if (i >= r && j >= r) continue;  // kernel-block entries are pinned to zero
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
            if (i == j)
                e(i, i) = 1.0;
            else
                e(i, j) = e(j, i) = rt2inv;
            basis.col(col++) = svec(u * e * u.transpose());
        }
    }
    return Subspace(svec_dim(n), basis.leftCols(col));
}

CriticalCone critical_cone(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    if (!contains_subgradient(f, x, v))
        throw capability_error("critical_cone: v is not a subgradient at x");
    if (const auto* sf = f.get_if<SpectralFn>()) {
        if (sf->kind != SpectralFn::Kind::psd_indicator)
            throw capability_error("critical_cone: spectral support is limited to psd_indicator; "
                                   "use a decomposable reduction otherwise");
        SpectralEig e = spectral_decompose(*sf, x);
        const double s = 1.0 + e.lambda.cwiseAbs().maxCoeff();
        int r = 0;
        while (r < sf->order && e.lambda[r] > 1e-8 * s) ++r;
        const Eigen::MatrixXd w = e.u.transpose() * unsvec(v) * e.u;
        int rank_v = 0;
        if (r < sf->order) {
            EigResult be = sym_eig(SymMatrix(w.bottomRightCorner(sf->order - r, sf->order - r)));
            const double sv = 1.0 + be.values.cwiseAbs().maxCoeff();
            for (int i = 0; i < be.values.size(); ++i)
                if (be.values[i] < -1e-8 * sv) ++rank_v;
        }
        return SpectralConeDesc{e.u, sf->order, r, rank_v};
    }
    Subdiff sd = subdifferential(f, x);
    const auto& fgc = std::get<FinGenConvex>(sd);
    return normal_cone_fgc(fgc, v);
}

// ---------------------------------------------------------------------------
// multiplier and nondegeneracy

namespace {

const DecomposableFn& require_decomposable(const FnHandle& f, const char* op) {
    const auto* g = f.get_if<DecomposableFn>();
    if (!g) throw capability_error(std::string(op) + ": handle is not decomposable");
    return *g;
}

}  // namespace

Eigen::VectorXd multiplier(const FnHandle& f, const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    const DecomposableFn& g = require_decomposable(f, "multiplier");
    const Eigen::VectorXd z = xi_value(g, u);
    FinGenConvex face = theta_face(g.theta, z);
    const Eigen::MatrixXd a = xi_jacobian(g, u).transpose();  // m x p

    // Least squares over the affine hull of the face.
    const Eigen::VectorXd v0 = face.vertices.front();
    Subspace par = affine_hull_directions(face);
    Eigen::VectorXd mu = v0;
    if (par.dim() > 0) {
        const Eigen::MatrixXd ap = a * par.basis();
        const Eigen::VectorXd alpha = ap.completeOrthogonalDecomposition().solve(y - a * v0);
        mu += par.basis() * alpha;
    }
    const double resid = (a * mu - y).lpNorm<Eigen::Infinity>();
    if (resid > 1e-9 * scale_of(y)) throw capability_error("multiplier: y is not a subgradient at u");
    if (!fgc_contains(face, mu, 1e-8)) throw capability_error("multiplier: y is not a subgradient at u");
    return mu;
}

Eigen::VectorXd multiplier_lp_route(const FnHandle& f, const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    const DecomposableFn& g = require_decomposable(f, "multiplier");
    const Eigen::VectorXd z = xi_value(g, u);
    FinGenConvex face = theta_face(g.theta, z);
    const Eigen::MatrixXd a = xi_jacobian(g, u).transpose();  // m x p
    const int m = static_cast<int>(a.rows());
    const int nv = static_cast<int>(face.vertices.size());
    const int nr = static_cast<int>(face.rays.size());

    // Feasibility LP in (lambda, rho): A (V lambda + R rho) = y,
    // sum lambda = 1, lambda >= 0, rho >= 0.
    Eigen::MatrixXd av(m, nv), ar(m, std::max(nr, 1));
    for (int j = 0; j < nv; ++j) av.col(j) = a * face.vertices[j];
    for (int j = 0; j < nr; ++j) ar.col(j) = a * face.rays[j];
    const int nvar = nv + nr;
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2 * m + 2 + nvar, nvar);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m + 2 + nvar);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < nv; ++j) {
            rows(i, j) = av(i, j);
            rows(m + i, j) = -av(i, j);
        }
        for (int j = 0; j < nr; ++j) {
            rows(i, nv + j) = ar(i, j);
            rows(m + i, nv + j) = -ar(i, j);
        }
        rhs[i] = y[i] + 1e-10;
        rhs[m + i] = -y[i] + 1e-10;
    }
    for (int j = 0; j < nv; ++j) {
        rows(2 * m, j) = 1.0;
        rows(2 * m + 1, j) = -1.0;
    }
    rhs[2 * m] = 1.0;
    rhs[2 * m + 1] = -1.0;
    for (int j = 0; j < nvar; ++j) rows(2 * m + 2 + j, j) = -1.0;

    LpResult r = lp_solve(Eigen::VectorXd::Zero(nvar), PolyhedronH{rows, rhs});
    auto* opt = std::get_if<LpOptimal>(&r);
    if (!opt) throw capability_error("multiplier: y is not a subgradient at u");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(g.range_dim());
    for (int j = 0; j < nv; ++j) mu += opt->point[j] * face.vertices[j];
    for (int j = 0; j < nr; ++j) mu += opt->point[nv + j] * face.rays[j];
    return mu;
}

bool nondegeneracy(const FnHandle& f, const Eigen::VectorXd& u) {
    const DecomposableFn& g = require_decomposable(f, "nondegeneracy");
    const Eigen::VectorXd z = xi_value(g, u);
    if (!std::isfinite(theta_value(g.theta, z)))
        throw capability_error("nondegeneracy: Xi(u) is outside dom theta");
    Subspace par = affine_hull_directions(theta_face(g.theta, z));
    Eigen::MatrixXd ker = null_space(xi_jacobian(g, u).transpose());
    if (par.dim() == 0 || ker.cols() == 0) return true;
    Eigen::MatrixXd stacked(g.range_dim(), par.dim() + ker.cols());
    stacked << par.basis(), ker;
    return matrix_rank(stacked) == par.dim() + static_cast<int>(ker.cols());
}

// ---------------------------------------------------------------------------
// prox

namespace {

Eigen::VectorXd prox_polyhedral(const PolyhedralFn& g, double gamma, const Eigen::VectorXd& x, int* ties) {
    const int n = g.ambient_dim();
    const int np = static_cast<int>(g.pieces.size());
    if (np > 64) throw capability_error("prox: polyhedral piece count above the 64-piece cap");
    bool found = false;
    double best = kInf;
    Eigen::VectorXd best_point;
    int multiplicity = 0;
    for (int i = 0; i < np; ++i) {
        // Region where piece i attains the max, intersected with the domain.
        const int extra = np - 1;
        Eigen::MatrixXd a(g.domain.num_rows() + extra, n);
        Eigen::VectorXd b(g.domain.num_rows() + extra);
        a.topRows(g.domain.num_rows()) = g.domain.A;
        b.head(g.domain.num_rows()) = g.domain.b;
        int row = g.domain.num_rows();
        for (int j = 0; j < np; ++j) {
            if (j == i) continue;
            a.row(row) = (g.pieces[j].c - g.pieces[i].c).transpose();
            b[row] = g.pieces[i].d - g.pieces[j].d;
            ++row;
        }
        Eigen::VectorXd target = x - gamma * g.pieces[i].c;
        Eigen::VectorXd p;
        try {
            p = project_point(PolyhedronH{a, b}, target);
        } catch (const capability_error&) {
            continue;  // empty region
        }
        const double obj = piece_value(g, p) + (p - x).squaredNorm() / (2.0 * gamma);
        const double tie_tol = 1e-12 * (1.0 + std::abs(obj));
        if (!found || obj < best - tie_tol) {
            found = true;
            best = obj;
            best_point = p;
            multiplicity = 1;
        } else if (obj <= best + tie_tol) {
            if ((p - best_point).lpNorm<Eigen::Infinity>() > 1e-10) {
                ++multiplicity;
                if (lex_less(p, best_point)) best_point = p;
            }
        }
    }
    if (!found) throw capability_error("prox: empty polyhedral domain");
    if (ties) *ties = multiplicity;
    return best_point;
}

// Projection of y onto {s in [0,1]^n : sum s = k} by bisection on the dual
// shift. Monotone decreasing in tau.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& y, int k) {
    const int n = static_cast<int>(y.size());
    auto sum_at = [&](double tau) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::clamp(y[i] - tau, 0.0, 1.0);
        return s;
    };
    double lo = y.minCoeff() - 2.0, hi = y.maxCoeff() + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sum_at(mid) >= static_cast<double>(k) ? lo : hi) = mid;
    }
    const double tau = 0.5 * (lo + hi);
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = std::clamp(y[i] - tau, 0.0, 1.0);
    return s;
}

double prox_1d(const Custom1DConvex& c, double gamma, double x) {
    auto h = [&](double w) { return w + gamma * c.deriv(w) - x; };
    double lo = x, hi = x;
    double step = 1.0 + std::abs(gamma * c.deriv(x));
    while (h(lo) > 0) {
        lo -= step;
        step *= 2.0;
        if (step > 1e12) throw numeric_error("prox: 1-D bracketing failed");
    }
    step = 1.0 + std::abs(gamma * c.deriv(x));
    while (h(hi) < 0) {
        hi += step;
        step *= 2.0;
        if (step > 1e12) throw numeric_error("prox: 1-D bracketing failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) <= 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ProxResult prox_detailed(const FnHandle& f, double gamma, const Eigen::VectorXd& x) {
    if (gamma <= 0.0) throw schema_error("prox: gamma must be positive");
    if (x.size() != f.ambient_dim()) throw schema_error("prox: dimension mismatch");
    if (f.prox_threshold() > 0.0 && gamma >= 1.0 / f.prox_threshold())
        throw capability_error("prox not single-valued guaranteed: gamma >= 1/r");

    ProxResult out;
    if (const auto* g = f.get_if<PolyhedralFn>()) {
        out.point = prox_polyhedral(*g, gamma, x, &out.tie_multiplicity);
        return out;
    }
    if (const auto* sf = f.get_if<SpectralFn>()) {
        SpectralEig e = spectral_decompose(*sf, x);
        if (sf->kind == SpectralFn::Kind::psd_indicator) {
            Eigen::VectorXd clipped = e.lambda.cwiseMax(0.0);
            out.point = svec(e.u * clipped.asDiagonal() * e.u.transpose());
            return out;
        }
        if (sf->kind == SpectralFn::Kind::sum_k_largest) {
            // Vector-level Moreau identity: prox_{g t}(z) = z - g P_D(z / g)
            // with D the box-capped simplex of the dual gauge.
            const Eigen::VectorXd s = project_capped_simplex(e.lambda / gamma, sf->k);
            const Eigen::VectorXd p = e.lambda - gamma * s;
            out.point = svec(e.u * p.asDiagonal() * e.u.transpose());
            return out;
        }
        throw capability_error("prox: unsupported for leading_eig (no prox threshold in the catalog)");
    }
    if (const auto* c = f.get_if<Custom1DConvex>()) {
        out.point = Eigen::VectorXd::Constant(1, prox_1d(*c, gamma, x[0]));
        return out;
    }
    throw capability_error("prox: unsupported for " + f.kind_name());
}

Eigen::VectorXd prox(const FnHandle& f, double gamma, const Eigen::VectorXd& x) {
    return prox_detailed(f, gamma, x).point;
}

// ---------------------------------------------------------------------------
// factories

PolyhedralFn make_weighted_l1(const Eigen::VectorXd& weights) {
    const int n = static_cast<int>(weights.size());
    if (n > 6) throw capability_error("make_weighted_l1: sign-pattern count beyond the 64-piece cap");
    PolyhedralFn g;
    g.domain = PolyhedronH::whole_space(n);
    for (long mask = 0; mask < (1L << n); ++mask) {
        Eigen::VectorXd c(n);
        for (int i = 0; i < n; ++i) c[i] = ((mask >> i) & 1) ? weights[i] : -weights[i];
        g.pieces.push_back({c, 0.0});
    }
    return g;
}

PolyhedralFn make_subspace_indicator(const Subspace& s) {
    const int n = s.ambient_dim();
    Subspace comp = s.orthogonal_complement();
    PolyhedralFn g;
    g.pieces.push_back({Eigen::VectorXd::Zero(n), 0.0});
    Eigen::MatrixXd a(2 * comp.dim(), n);
    for (int j = 0; j < comp.dim(); ++j) {
        a.row(2 * j) = comp.basis().col(j).transpose();
        a.row(2 * j + 1) = -comp.basis().col(j).transpose();
    }
    g.domain = PolyhedronH{a, Eigen::VectorXd::Zero(2 * comp.dim())};
    return g;
}

}  // namespace protoreg
