#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <variant>

#include "protoreg/errors.hpp"
#include "protoreg/functions.hpp"
#include "protoreg/rng.hpp"
#include "support/catalog.hpp"

using namespace protoreg;
using namespace testsupport;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Conjugate of a polyhedral function by the epigraph LP:
// f*(v) = sup { <v,u> - t : <c_i,u> + d_i <= t, u in domain }.
double polyhedral_conjugate(const PolyhedralFn& g, const VectorXd& v) {
    const int n = g.ambient_dim();
    const int np = static_cast<int>(g.pieces.size());
    const int md = g.domain.num_rows();
    MatrixXd a = MatrixXd::Zero(np + md, n + 1);
    VectorXd b(np + md);
    for (int i = 0; i < np; ++i) {
        a.row(i).head(n) = g.pieces[i].c.transpose();
        a(i, n) = -1.0;
        b[i] = -g.pieces[i].d;
    }
    a.block(np, 0, md, n) = g.domain.A;
    b.tail(md) = g.domain.b;
    VectorXd cost(n + 1);
    cost.head(n) = -v;
    cost[n] = 1.0;
    LpResult r = lp_solve(cost, PolyhedronH{a, b});
    auto* opt = std::get_if<LpOptimal>(&r);
    REQUIRE(opt != nullptr);
    return -opt->value;
}

}  // namespace

TEST_CASE("value across the catalog") {
    FnHandle l1 = l1_handle(2);
    CHECK(value(l1, vecd({1, -2})) == doctest::Approx(3.0));

    FnHandle psd = psd_handle(2);
    CHECK(value(psd, svec((MatrixXd(2, 2) << 1, 0, 0, -1).finished())) == kInf);
    CHECK(value(psd, svec((MatrixXd(2, 2) << 1, 0, 0, 0).finished())) == 0.0);

    FnHandle g2 = sum_k_largest_handle(3, 2);
    CHECK(value(g2, svec((MatrixXd(3, 3) << 5, 0, 0, 0, 3, 0, 0, 0, 1).finished())) == doctest::Approx(8.0));

    CHECK_THROWS_AS(value(l1, VectorXd::Zero(3)), schema_error);
}

TEST_CASE("subdifferential of l1 at the origin is the unit box") {
    FnHandle l1 = l1_handle(2);
    Subdiff sd = subdifferential(l1, VectorXd::Zero(2));
    const auto& box = std::get<FinGenConvex>(sd);
    CHECK(box.vertices.size() == 4);
    CHECK(fgc_contains(box, vecd({0.3, -0.5})));
    CHECK(fgc_contains(box, vecd({1.0, 1.0})));
    CHECK_FALSE(fgc_contains(box, vecd({1.5, 0.0}), 1e-6));
    CHECK(ri_membership(box, vecd({0.3, -0.5})));
    CHECK_FALSE(ri_membership(box, vecd({1.0, 0.0})));
}

TEST_CASE("sublinear subdifferential is the exposed face") {
    FnHandle av = abs_sublinear_handle();
    Subdiff sd = subdifferential(av, vecd({2.0}));
    const auto& face = std::get<FinGenConvex>(sd);
    REQUIRE(face.vertices.size() == 1);
    CHECK(face.vertices[0][0] == doctest::Approx(1.0));
}

TEST_CASE("psd subdifferential block description") {
    FnHandle psd = psd_handle(2);
    const MatrixXd x = (MatrixXd(2, 2) << 1, 0, 0, 0).finished();
    Subdiff sd = subdifferential(psd, svec(x));
    const auto& desc = std::get<SpectralSubdiff>(sd);
    CHECK(desc.rank_x == 1);
    // Members are Y = diag(0, y) with y <= 0.
    CHECK(spectral_subdiff_contains(desc, (MatrixXd(2, 2) << 0, 0, 0, -1).finished()));
    CHECK(spectral_subdiff_contains(desc, MatrixXd::Zero(2, 2)));
    CHECK_FALSE(spectral_subdiff_contains(desc, (MatrixXd(2, 2) << 0, 0, 0, 1).finished()));
    CHECK_FALSE(spectral_subdiff_contains(desc, (MatrixXd(2, 2) << -0.5, 0, 0, -1).finished()));

    // Cross-check by the normal-cone variational inequality on samples of
    // the PSD cone: <V, S - X> <= 0 for all psd S.
    Rng rng(40);
    const MatrixXd v_in = (MatrixXd(2, 2) << 0, 0, 0, -1).finished();
    for (int s = 0; s < 200; ++s) {
        MatrixXd r = rng.matrix(2, 2, -1.0, 1.0);
        MatrixXd psd_sample = r * r.transpose();
        CHECK((v_in.array() * (psd_sample - x).array()).sum() <= 1e-10);
    }
}

TEST_CASE("contains_subgradient across the catalog") {
    FnHandle l1 = l1_handle(2);
    CHECK(contains_subgradient(l1, VectorXd::Zero(2), vecd({0.3, -0.5})));
    CHECK_FALSE(contains_subgradient(l1, VectorXd::Zero(2), vecd({1.5, 0.0})));

    FnHandle psd = psd_handle(2);
    CHECK(contains_subgradient(psd, svec((MatrixXd(2, 2) << 1, 0, 0, 0).finished()),
                               svec((MatrixXd(2, 2) << 0, 0, 0, -1).finished())));
}

TEST_CASE("critical cones of l1") {
    FnHandle l1 = l1_handle(2);
    // Interior subgradient: K = {0}.
    CriticalCone k0 = critical_cone(l1, VectorXd::Zero(2), vecd({0.3, -0.5}));
    CHECK(std::get<FinGenConvex>(k0).rays.empty());
    // Face midpoint (1, 0): K = cone{e1}.
    CriticalCone k1 = critical_cone(l1, VectorXd::Zero(2), vecd({1.0, 0.0}));
    const auto& kc = std::get<FinGenConvex>(k1);
    REQUIRE(kc.rays.size() == 1);
    CHECK((kc.rays[0] / kc.rays[0].norm() - vecd({1.0, 0.0})).norm() <= 1e-9);
}

TEST_CASE("critical cone of a subspace indicator") {
    // delta_L with L = span{e1}: at x = 0, v = (0,1) in L^perp, K = L.
    Subspace l(2, (MatrixXd(2, 1) << 1, 0).finished());
    FnHandle ind = subspace_indicator_handle(l);
    CriticalCone k = critical_cone(ind, VectorXd::Zero(2), vecd({0.0, 1.0}));
    const auto& kc = std::get<FinGenConvex>(k);
    LinealityResult lr = lineality_check(kc);
    auto* sub = std::get_if<Subspace>(&lr);
    REQUIRE(sub != nullptr);
    CHECK(sub->dim() == 1);
    CHECK(sub->contains(vecd({1.0, 0.0})));
}

TEST_CASE("multiplier on the worked decomposable example") {
    FnHandle g = parab_plus_linear_decomposable();
    // y = (0, 0.5): solve mu * (0,1) = y over aff[-1,1], check membership.
    VectorXd mu = multiplier(g, VectorXd::Zero(2), vecd({0.0, 0.5}));
    CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-9));
    VectorXd mu2 = multiplier(g, VectorXd::Zero(2), vecd({0.0, 1.0}));
    CHECK(mu2[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(multiplier(g, VectorXd::Zero(2), vecd({0.0, 1.5})), capability_error);
    CHECK_THROWS_AS(multiplier(g, VectorXd::Zero(2), vecd({0.7, 0.5})), capability_error);
}

TEST_CASE("multiplier with identity inner map") {
    // theta = max(0, .), Xi = id on R, y = 0.7 at u = 0 -> mu = 0.7.
    DecomposableFn g;
    g.base_point = VectorXd::Zero(1);
    g.theta.d0.vertices = {vecd({0.0}), vecd({1.0})};
    g.jac = MatrixXd::Identity(1, 1);
    g.quad = {SymMatrix::zero(1)};
    FnHandle h(g);
    VectorXd mu = multiplier(h, VectorXd::Zero(1), vecd({0.7}));
    CHECK(mu[0] == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("nondegeneracy examples") {
    FnHandle g = parab_plus_linear_decomposable();
    CHECK(nondegeneracy(g, VectorXd::Zero(2)));

    // Xi identically zero: everything degenerate.
    DecomposableFn zero;
    zero.base_point = VectorXd::Zero(2);
    zero.theta.d0.vertices = {vecd({-1.0}), vecd({1.0})};
    zero.jac = MatrixXd::Zero(1, 2);
    zero.quad = {SymMatrix::zero(2)};
    CHECK_FALSE(nondegeneracy(FnHandle(zero), VectorXd::Zero(2)));

    // Singleton subdifferential: par = {0}, nondegenerate regardless of Xi.
    DecomposableFn smooth = zero;
    smooth.theta.d0.vertices = {vecd({0.5})};
    CHECK(nondegeneracy(FnHandle(smooth), VectorXd::Zero(2)));
}

TEST_CASE("prox soft threshold and eigenvalue clipping") {
    FnHandle l1 = l1_handle(2);
    VectorXd p = prox(l1, 1.0, vecd({2.0, -0.5}));
    CHECK((p - vecd({1.0, 0.0})).lpNorm<Eigen::Infinity>() <= 1e-9);

    FnHandle psd = psd_handle(2);
    const MatrixXd x = (MatrixXd(2, 2) << 2, 0, 0, -3).finished();
    VectorXd pp = prox(psd, 0.7, svec(x));
    CHECK((unsvec(pp) - (MatrixXd(2, 2) << 2, 0, 0, 0).finished()).norm() <= 1e-9);

    CHECK_THROWS_AS(prox(l1, -1.0, vecd({0.0, 0.0})), schema_error);
}

TEST_CASE("prox of sum_k_largest matches the QP oracle on the eigenvalue vector") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3;
        const int k = 1 + rng.index(n);
        FnHandle gk = sum_k_largest_handle(n, k);
        const double gamma = rng.uniform(0.3, 2.0);
        MatrixXd base = rng.matrix(n, n, -2.0, 2.0);
        SymMatrix xm(base);
        EigResult e = sym_eig(xm);

        // Independent oracle for the capped-simplex projection: active-set QP
        // over the H-form of D = {0 <= s <= 1, sum s = k}.
        MatrixXd a(2 * n + 2, n);
        VectorXd b(2 * n + 2);
        a.topRows(n) = MatrixXd::Identity(n, n);
        b.head(n).setOnes();
        a.middleRows(n, n) = -MatrixXd::Identity(n, n);
        b.segment(n, n).setZero();
        a.row(2 * n).setOnes();
        b[2 * n] = k;
        a.row(2 * n + 1).setConstant(-1.0);
        b[2 * n + 1] = -k;
        VectorXd s_oracle = project_point(PolyhedronH{a, b}, e.values / gamma);
        VectorXd p_oracle = e.values - gamma * s_oracle;

        VectorXd px = prox(gk, gamma, svec(xm.mat()));
        EigResult pe = sym_eig(SymMatrix(unsvec(px)));
        for (int i = 0; i < n; ++i) CHECK(pe.values[i] == doctest::Approx(p_oracle[i]).epsilon(1e-6));
    }
}

TEST_CASE("prox of the worked spectral example") {
    FnHandle g2 = sum_k_largest_handle(3, 2);
    const MatrixXd x = (MatrixXd(3, 3) << 5, 0, 0, 0, 3, 0, 0, 0, 1).finished();
    VectorXd p = prox(g2, 1.0, svec(x));
    const MatrixXd expect = (MatrixXd(3, 3) << 4, 0, 0, 0, 2, 0, 0, 0, 1).finished();
    CHECK((unsvec(p) - expect).norm() <= 1e-9);
}

TEST_CASE("prox optimality against random perturbations") {
    Rng rng(42);
    std::vector<FnHandle> fns = {l1_handle(2), psd_handle(2), sum_k_largest_handle(3, 2),
                                 even_power_handle(4)};
    for (const auto& f : fns) {
        const int n = f.ambient_dim();
        for (int rep = 0; rep < 5; ++rep) {
            const double gamma = rng.uniform(0.4, 1.5);
            const VectorXd x = rng.vector(n, -2.0, 2.0);
            const VectorXd p = prox(f, gamma, x);
            const double fp = value(f, p);
            REQUIRE(std::isfinite(fp));
            const double obj = fp + (p - x).squaredNorm() / (2.0 * gamma);
            for (int s = 0; s < 100; ++s) {
                const VectorXd w = p + 0.2 * rng.gaussian_vector(n);
                const double fw = value(f, w);
                if (!std::isfinite(fw)) continue;
                CHECK(fw + (w - x).squaredNorm() / (2.0 * gamma) >= obj - 1e-9);
            }
        }
    }
}

TEST_CASE("prox capability errors") {
    FnHandle g = parab_plus_linear_decomposable();
    CHECK_THROWS_AS(prox(g, 1.0, VectorXd::Zero(2)), capability_error);

    SpectralFn le;
    le.kind = SpectralFn::Kind::leading_eig;
    le.order = 2;
    le.k = 2;
    CHECK_THROWS_AS(prox(FnHandle(le), 1.0, svec(MatrixXd::Identity(2, 2))), capability_error);
}

TEST_CASE("Fenchel identity holds at subgradient pairs of convex members") {
    Rng rng(43);
    FnHandle l1 = l1_handle(3);
    const auto* g = l1.get_if<PolyhedralFn>();
    for (int rep = 0; rep < 30; ++rep) {
        VectorXd x = rng.vector(3, -1.0, 1.0);
        for (int i = 0; i < 3; ++i)
            if (rng.uniform() < 0.5) x[i] = 0.0;
        // Pick a subgradient: sign on supports, interior value on zeros.
        VectorXd v(3);
        for (int i = 0; i < 3; ++i)
            v[i] = std::abs(x[i]) > 0 ? (x[i] > 0 ? 1.0 : -1.0) : rng.uniform(-0.9, 0.9);
        REQUIRE(contains_subgradient(l1, x, v));
        const double fx = value(l1, x);
        const double fstar = polyhedral_conjugate(*g, v);
        CHECK(fx + fstar == doctest::Approx(x.dot(v)).epsilon(1e-8));
    }
}

TEST_CASE("sublinear face properties: every face sits inside d0 and matches the subderivative") {
    Rng rng(44);
    // Random polytope d0 in R^2, 200 sampled directions.
    FinGenConvex d0;
    for (int i = 0; i < 5; ++i) d0.vertices.push_back(rng.vector(2, -1.0, 1.0));
    SublinearFn th{d0};
    FnHandle h(th);
    for (int s = 0; s < 200; ++s) {
        const VectorXd z = rng.vector(2, -1.0, 1.0);
        FinGenConvex face = theta_face(th, z);
        for (const auto& v : face.vertices) CHECK(fgc_contains(d0, v, 1e-8));
        // d theta(0)(w) = theta(w): the support function evaluated by the
        // forward quotient at t = 1e-6.
        const double t = 1e-6;
        const double quot = (theta_value(th, t * z)) / t;
        CHECK(std::abs(quot - theta_value(th, z)) <= 1e-4);
    }
}

TEST_CASE("critical cone polarity against subdifferential samples") {
    Rng rng(45);
    FnHandle l1 = l1_handle(2);
    const VectorXd x = VectorXd::Zero(2);
    std::vector<VectorXd> vs = {vecd({1.0, 0.0}), vecd({1.0, 1.0}), vecd({0.2, -0.4}), vecd({-1.0, 0.3})};
    for (const auto& v : vs) {
        CriticalCone kc = critical_cone(l1, x, v);
        const auto& cone = std::get<FinGenConvex>(kc);
        Subdiff sd = subdifferential(l1, x);
        const auto& box = std::get<FinGenConvex>(sd);
        for (const auto& k : cone.rays) {
            for (int s = 0; s < 100; ++s) {
                // Sample from the box by blending vertices.
                VectorXd w = VectorXd::Zero(2);
                VectorXd lam = rng.vector(static_cast<int>(box.vertices.size()), 0.0, 1.0);
                lam /= lam.sum();
                for (size_t i = 0; i < box.vertices.size(); ++i) w += lam[static_cast<int>(i)] * box.vertices[i];
                CHECK(k.dot(w - v) <= 1e-8 * (1.0 + k.norm()));
            }
        }
    }
}

TEST_CASE("multiplier uniqueness: least squares and LP feasibility agree") {
    Rng rng(46);
    FnHandle g = parab_plus_linear_decomposable();
    for (int rep = 0; rep < 20; ++rep) {
        const double mu_true = rng.uniform(-0.95, 0.95);
        const VectorXd y = vecd({0.0, mu_true});
        const VectorXd m1 = multiplier(g, VectorXd::Zero(2), y);
        const VectorXd m2 = multiplier_lp_route(g, VectorXd::Zero(2), y);
        CHECK((m1 - m2).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("subl(b): subdifferentials at nonzero points stay inside d0") {
    Rng rng(47);
    FinGenConvex d0;
    for (int i = 0; i < 4; ++i) d0.vertices.push_back(rng.vector(3, -1.0, 1.0));
    d0.rays.push_back(rng.unit_vector(3));
    SublinearFn th{d0};
    int tested = 0;
    for (int s = 0; s < 200; ++s) {
        const VectorXd z = rng.vector(3, -1.0, 1.0);
        if (!std::isfinite(theta_value(th, z))) continue;
        FinGenConvex face = theta_face(th, z);
        REQUIRE(!face.vertices.empty());
        for (const auto& v : face.vertices) CHECK(fgc_contains(d0, v, 1e-8));
        ++tested;
    }
    CHECK(tested > 50);
}
