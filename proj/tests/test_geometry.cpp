#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <variant>
#include <vector>

#include "protoreg/convex_sets.hpp"
#include "protoreg/errors.hpp"
#include "protoreg/linalg.hpp"
#include "protoreg/lp.hpp"
#include "protoreg/rng.hpp"

using namespace protoreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec2(double a, double b) {
    VectorXd v(2);
    v << a, b;
    return v;
}

VectorXd vec3(double a, double b, double c) {
    VectorXd v(3);
    v << a, b, c;
    return v;
}

// Independent relative-interior oracle: p is in ri C iff p +- delta e stays
// in C for every direction e of an affine-hull basis.
bool ri_perturbation_oracle(const FinGenConvex& c, const VectorXd& p, double delta = 1e-6) {
    if (!fgc_contains(c, p, 1e-9)) return false;
    Subspace aff = affine_hull_directions(c);
    for (int j = 0; j < aff.dim(); ++j) {
        VectorXd e = aff.basis().col(j);
        if (!fgc_contains(c, p + delta * e, 1e-9)) return false;
        if (!fgc_contains(c, p - delta * e, 1e-9)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("lp_solve box endpoints") {
    // minimize x over { 0 <= x <= 1 }
    MatrixXd a(2, 1);
    a << 1, -1;
    VectorXd b(2);
    b << 1, 0;
    VectorXd c(1);
    c << 1;
    LpResult r = lp_solve(c, PolyhedronH{a, b});
    auto* opt = std::get_if<LpOptimal>(&r);
    REQUIRE(opt != nullptr);
    CHECK(opt->value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(opt->point[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lp_solve open ray is unbounded") {
    // minimize -x over { x >= 0 }
    MatrixXd a(1, 1);
    a << -1;
    VectorXd b(1);
    b << 0;
    VectorXd c(1);
    c << -1;
    LpResult r = lp_solve(c, PolyhedronH{a, b});
    CHECK(std::holds_alternative<LpUnbounded>(r));
}

TEST_CASE("lp_solve empty box is infeasible") {
    // { x <= -1, x >= 0 }
    MatrixXd a(2, 1);
    a << 1, -1;
    VectorXd b(2);
    b << -1, 0;
    VectorXd c(1);
    c << 1;
    LpResult r = lp_solve(c, PolyhedronH{a, b});
    CHECK(std::holds_alternative<LpInfeasible>(r));
}

TEST_CASE("lp_solve random LPs carry consistent certificates") {
    Rng rng(101);
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + rng.index(3);
        const int m = n + 1 + rng.index(5);
        MatrixXd a = rng.matrix(m, n, -1.0, 1.0);
        VectorXd b = rng.vector(m, 0.2, 1.2);  // 0 strictly feasible
        VectorXd c = rng.gaussian_vector(n);
        LpResult r = lp_solve(c, PolyhedronH{a, b});
        if (auto* opt = std::get_if<LpOptimal>(&r)) {
            ++solved;
            CHECK((a * opt->point - b).maxCoeff() <= 1e-9 * (1.0 + opt->point.norm()));
            CHECK((c + a.transpose() * opt->dual).lpNorm<Eigen::Infinity>() <= 1e-7);
            // Optimal among sampled feasible points.
            for (int s = 0; s < 40; ++s) {
                VectorXd u = rng.vector(n, -2.0, 2.0);
                if (((a * u - b).array() <= 0).all()) CHECK(c.dot(u) >= opt->value - 1e-7);
            }
        }
    }
    CHECK(solved > 10);
}

TEST_CASE("project_point orthant clipping") {
    // P = { u in R^2 : u >= 0 }, x = (-1, 2) -> (0, 2)
    MatrixXd a(2, 2);
    a << -1, 0, 0, -1;
    VectorXd b = VectorXd::Zero(2);
    VectorXd p = project_point(PolyhedronH{a, b}, vec2(-1, 2));
    CHECK((p - vec2(0, 2)).norm() <= 1e-9);
}

TEST_CASE("project_point halfspace formula") {
    // P = { u : u1 + u2 <= 0 }, x = (1,1) -> (0,0)
    MatrixXd a(1, 2);
    a << 1, 1;
    VectorXd b = VectorXd::Zero(1);
    VectorXd p = project_point(PolyhedronH{a, b}, vec2(1, 1));
    CHECK((p - vec2(0, 0)).norm() <= 1e-9);
}

TEST_CASE("project_point infeasible polyhedron reports emptiness") {
    MatrixXd a(2, 1);
    a << 1, -1;
    VectorXd b(2);
    b << -1, 0;
    CHECK_THROWS_AS(project_point(PolyhedronH{a, b}, VectorXd::Zero(1)), capability_error);
}

TEST_CASE("project_point matches grid search on random polyhedra") {
    Rng rng(202);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 3, m = 5;
        MatrixXd a = rng.matrix(m, n, -1.0, 1.0);
        VectorXd b = rng.vector(m, 0.1, 1.0);
        VectorXd x = rng.vector(n, -2.0, 2.0);
        PolyhedronH p{a, b};
        VectorXd proj = project_point(p, x);
        REQUIRE(p.feasible(proj, 1e-8));
        double best = (proj - x).squaredNorm();
        // Dense sample of feasible points; the projection must win and the
        // variational inequality must hold against every sample.
        for (int s = 0; s < 4000; ++s) {
            VectorXd u = rng.vector(n, -2.0, 2.0);
            if (!p.feasible(u, 0.0)) continue;
            CHECK((u - x).squaredNorm() >= best - 1e-3);
            CHECK((x - proj).dot(u - proj) <= 1e-8 + 1e-8 * u.norm());
        }
        // Idempotence on feasible points.
        CHECK((project_point(p, proj) - proj).norm() <= 1e-9);
    }
}

TEST_CASE("normal_cone orthant corner and faces") {
    MatrixXd a(2, 2);
    a << -1, 0, 0, -1;
    VectorXd b = VectorXd::Zero(2);
    PolyhedronH orthant{a, b};

    FinGenConvex at_corner = normal_cone(orthant, vec2(0, 0));
    REQUIRE(at_corner.rays.size() == 2);
    CHECK((at_corner.rays[0] - vec2(-1, 0)).norm() <= 1e-12);
    CHECK((at_corner.rays[1] - vec2(0, -1)).norm() <= 1e-12);

    FinGenConvex at_face = normal_cone(orthant, vec2(1, 0));
    REQUIRE(at_face.rays.size() == 1);
    CHECK((at_face.rays[0] - vec2(0, -1)).norm() <= 1e-12);

    FinGenConvex interior = normal_cone(orthant, vec2(1, 1));
    CHECK(interior.rays.empty());

    CHECK_THROWS_AS(normal_cone(orthant, vec2(-1, 0)), schema_error);
}

TEST_CASE("normal cone generators polar-pair with feasible directions") {
    Rng rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3, m = 6;
        MatrixXd a = rng.matrix(m, n, -1.0, 1.0);
        VectorXd b = rng.vector(m, 0.05, 0.8);
        PolyhedronH p{a, b};
        VectorXd x = project_point(p, rng.vector(n, 0.5, 3.0));  // often lands on the boundary
        FinGenConvex nc = normal_cone(p, x);
        for (const auto& g : nc.rays) {
            for (int s = 0; s < 200; ++s) {
                VectorXd u = rng.vector(n, -1.0, 1.0);
                if (!p.feasible(u, 0.0)) continue;
                // u - x is a feasible direction into P from x.
                CHECK(g.dot(u - x) <= 1e-9 * (1.0 + u.norm()));
            }
        }
    }
}

TEST_CASE("ri_membership on a segment") {
    FinGenConvex seg;
    seg.vertices = {vec2(0, 0), vec2(2, 0)};
    CHECK(ri_membership(seg, vec2(1, 0)));
    CHECK_FALSE(ri_membership(seg, vec2(0, 0)));  // relative boundary
    CHECK_FALSE(ri_membership(seg, vec2(3, 0)));  // not a member at all
}

TEST_CASE("ri_membership agrees with the perturbation oracle on random polytopes") {
    Rng rng(404);
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + rng.index(3);  // ambient <= 4
        FinGenConvex c;
        const int nv = 1 + rng.index(5);
        for (int i = 0; i < nv; ++i) c.vertices.push_back(rng.vector(n, -1.0, 1.0));
        if (rng.uniform() < 0.4) {
            const int nr = 1 + rng.index(2);
            for (int i = 0; i < nr; ++i) c.rays.push_back(rng.unit_vector(n));
            if (rng.uniform() < 0.5) c.rays.push_back(-c.rays.front());
        }
        // Half the probes are convex combinations (members), half arbitrary.
        // Nonzero weights stay bounded away from 0 so the probe is never
        // within the oracle's perturbation radius of a face by accident.
        VectorXd p;
        if (rng.uniform() < 0.5 || c.vertices.size() == 1) {
            VectorXd w = rng.vector(static_cast<int>(c.vertices.size()), 0.05, 1.0);
            if (rng.uniform() < 0.3 && w.size() > 1) w[rng.index(static_cast<int>(w.size()))] = 0.0;
            w /= w.sum();
            p = VectorXd::Zero(n);
            for (size_t i = 0; i < c.vertices.size(); ++i) p += w[static_cast<int>(i)] * c.vertices[i];
            if (!c.rays.empty() && rng.uniform() < 0.5) p += rng.uniform(0.05, 1.0) * c.rays.front();
        } else {
            p = rng.vector(n, -1.5, 1.5);
        }
        const bool fast = ri_membership(c, p);
        const bool oracle = ri_perturbation_oracle(c, p);
        CHECK(fast == oracle);
        ++checked;
    }
    CHECK(checked == 500);
}

TEST_CASE("lineality_check subspace and witness cases") {
    FinGenConvex line = FinGenConvex::cone_hull(2, {vec2(1, 0), vec2(-1, 0)});
    LinealityResult r = lineality_check(line);
    auto* sub = std::get_if<Subspace>(&r);
    REQUIRE(sub != nullptr);
    CHECK(sub->dim() == 1);
    CHECK(sub->contains(vec2(5, 0)));

    FinGenConvex halfline = FinGenConvex::cone_hull(2, {vec2(1, 0)});
    LinealityResult r2 = lineality_check(halfline);
    auto* ns = std::get_if<NotSubspace>(&r2);
    REQUIRE(ns != nullptr);
    CHECK((ns->witness - vec2(1, 0)).norm() <= 1e-12);
}

TEST_CASE("lineality_check finds a 2-dimensional subspace in R^3") {
    const double s = 1.0 / std::sqrt(2.0);
    FinGenConvex c = FinGenConvex::cone_hull(
        3, {vec3(1, 0, 0), vec3(-1, 0, 0), vec3(s, s, 0), vec3(-s, -s, 0)});
    LinealityResult r = lineality_check(c);
    auto* sub = std::get_if<Subspace>(&r);
    REQUIRE(sub != nullptr);
    // Rank of the generator matrix is the oracle for the dimension.
    MatrixXd g(3, 4);
    g.col(0) = vec3(1, 0, 0);
    g.col(1) = vec3(-1, 0, 0);
    g.col(2) = vec3(s, s, 0);
    g.col(3) = vec3(-s, -s, 0);
    CHECK(sub->dim() == matrix_rank(g));
    // Round-trip: span generators of the subspace are members of the cone.
    FinGenConvex back = FinGenConvex::from_subspace(*sub);
    for (const auto& ray : back.rays) CHECK(fgc_contains(c, ray, 1e-8));
}

TEST_CASE("sym_eig diagonal and reflection") {
    EigResult d = sym_eig(SymMatrix((MatrixXd(2, 2) << 3, 0, 0, 1).finished()));
    CHECK(d.values[0] == doctest::Approx(3.0));
    CHECK(d.values[1] == doctest::Approx(1.0));
    CHECK((d.vectors - MatrixXd::Identity(2, 2)).norm() <= 1e-12);

    EigResult r = sym_eig(SymMatrix((MatrixXd(2, 2) << 0, 1, 1, 0).finished()));
    CHECK(r.values[0] == doctest::Approx(1.0));
    CHECK(r.values[1] == doctest::Approx(-1.0));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(r.vectors(0, 0)) - s) <= 1e-12);
    // Eigenvectors are (1,1)/sqrt(2) and (1,-1)/sqrt(2) up to sign.
    CHECK(std::abs(r.vectors.col(0).dot(vec2(1, 1))) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(r.vectors.col(1).dot(vec2(1, -1))) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("sym_eig reconstruction, trace and shift properties") {
    Rng rng(505);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + rng.index(7);
        SymMatrix m(rng.matrix(n, n, -2.0, 2.0));
        EigResult e = sym_eig(m);
        const double scale = 1.0 + m.mat().norm();
        CHECK((m.mat() * e.vectors - e.vectors * e.values.asDiagonal().toDenseMatrix()).norm() <= 1e-9 * scale);
        CHECK((e.vectors.transpose() * e.vectors - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
        for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1] - 1e-12);
        CHECK(e.values.sum() == doctest::Approx(m.mat().trace()).epsilon(1e-9));

        const double c = rng.uniform(-3.0, 3.0);
        EigResult shifted = sym_eig(SymMatrix(m.mat() + c * MatrixXd::Identity(n, n)));
        for (int i = 0; i < n; ++i) CHECK(shifted.values[i] == doctest::Approx(e.values[i] + c).epsilon(1e-9));
    }
}

TEST_CASE("subspace_ops on axis, zero and diagonal subspaces") {
    Subspace ax(2, (MatrixXd(2, 1) << 1, 0).finished());
    SubspaceOps ops = subspace_ops(ax);
    CHECK((ops.projector.mat() - (MatrixXd(2, 2) << 1, 0, 0, 0).finished()).norm() <= 1e-12);
    CHECK(ops.complement.dim() == 1);
    CHECK(ops.complement.contains(vec2(0, 1)));

    SubspaceOps zero_ops = subspace_ops(Subspace::zero(3));
    CHECK(zero_ops.projector.mat().norm() == 0.0);
    CHECK(zero_ops.complement.dim() == 3);

    const double s = 1.0 / std::sqrt(2.0);
    Subspace diag(2, (MatrixXd(2, 1) << s, s).finished());
    SubspaceOps diag_ops = subspace_ops(diag);
    CHECK((diag_ops.projector.mat() - (MatrixXd(2, 2) << 0.5, 0.5, 0.5, 0.5).finished()).norm() <= 1e-10);
    CHECK(std::abs(diag_ops.complement.basis().col(0).dot(diag.basis().col(0))) <= 1e-10);
}

TEST_CASE("svec preserves the trace inner product") {
    Rng rng(606);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + rng.index(4);
        SymMatrix x(rng.matrix(n, n, -1.0, 1.0));
        SymMatrix y(rng.matrix(n, n, -1.0, 1.0));
        CHECK(svec(x.mat()).dot(svec(y.mat())) == doctest::Approx((x.mat() * y.mat()).trace()).epsilon(1e-12));
        CHECK((unsvec(svec(x.mat())) - x.mat()).norm() <= 1e-13);
    }
}

TEST_CASE("polar_cone_generators reproduces textbook polars") {
    // Polar of the nonnegative orthant constraints {w : w_i <= 0}.
    MatrixXd rows = MatrixXd::Identity(2, 2);
    FinGenConvex c = polar_cone_generators(rows, 2);
    CHECK(fgc_contains(c, vec2(-1, -2), 1e-9));
    CHECK_FALSE(fgc_contains(c, vec2(1e-3, -1), 1e-6));

    // Single row -> halfspace: lines parallel to the boundary survive.
    MatrixXd one_row(1, 2);
    one_row << 1, 0;
    FinGenConvex half = polar_cone_generators(one_row, 2);
    CHECK(fgc_contains(half, vec2(-3, 7), 1e-9));
    CHECK(fgc_contains(half, vec2(0, -4), 1e-9));
    CHECK_FALSE(fgc_contains(half, vec2(0.5, 0), 1e-6));
}

TEST_CASE("normal_cone_fgc at box points") {
    FinGenConvex box = FinGenConvex::box(vec2(1, 1));
    // Interior point: normal cone is {0}.
    FinGenConvex at_interior = normal_cone_fgc(box, vec2(0.3, -0.5));
    CHECK(at_interior.rays.empty());
    // Edge midpoint (1, 0): normal cone is the ray through e1.
    FinGenConvex at_edge = normal_cone_fgc(box, vec2(1, 0));
    REQUIRE(at_edge.rays.size() == 1);
    CHECK((at_edge.rays[0] / at_edge.rays[0].norm() - vec2(1, 0)).norm() <= 1e-9);
    // Corner (1, 1): the orthant cone.
    FinGenConvex at_corner = normal_cone_fgc(box, vec2(1, 1));
    CHECK(fgc_contains(at_corner, vec2(2, 3), 1e-9));
    CHECK_FALSE(fgc_contains(at_corner, vec2(-0.5, 0.2), 1e-6));
}
