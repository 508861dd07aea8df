#include "protoreg/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "protoreg/convex_sets.hpp"
#include "protoreg/errors.hpp"
#include "protoreg/proto.hpp"
#include "protoreg/rng.hpp"

namespace protoreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double second_derivative_fd(const Custom1DConvex& c, double x, double h = 1e-5) {
    return (c.deriv(x + h) - c.deriv(x - h)) / (2.0 * h);
}

}  // namespace

double quotient(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t,
                const Eigen::VectorXd& w) {
    if (t <= 0.0) throw schema_error("quotient: t must be positive");
    const double fx = value(f, x);
    if (!std::isfinite(fx)) throw capability_error("quotient: base point outside dom f");
    const double fw = value(f, x + t * w);
    if (!std::isfinite(fw)) return kInf;
    return (fw - fx - t * v.dot(w)) / (0.5 * t * t);
}

namespace {

// Minimum of the quotient over the ball B(w, radius) in the w' argument by
// deterministic pattern search. For convex members the quotient is convex
// in w', so compass steps with shrinking radius converge to the ball
// minimum; the liminf definition needs this inner minimization, not just
// the value at w' = w.
double ball_min_quotient(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t,
                         const Eigen::VectorXd& w, double radius, Rng& rng) {
    const int n = static_cast<int>(w.size());
    Eigen::VectorXd cur = w;
    double fcur = quotient(f, x, v, t, w);
    double rho = 0.5 * radius;
    int rounds = 0;
    while (rho > 1e-5 * radius && ++rounds < 400) {
        bool improved = false;
        auto try_step = [&](const Eigen::VectorXd& dir) {
            Eigen::VectorXd cand = cur + rho * dir;
            if ((cand - w).norm() > radius) return;
            const double fc = quotient(f, x, v, t, cand);
            const bool accept = std::isfinite(fcur)
                                    ? fc < fcur - 1e-15 * (1.0 + std::abs(fcur))
                                    : std::isfinite(fc);
            if (accept) {
                cur = cand;
                fcur = fc;
                improved = true;
            }
        };
        for (int i = 0; i < n; ++i) {
            try_step(Eigen::VectorXd::Unit(n, i));
            try_step(-Eigen::VectorXd::Unit(n, i));
        }
        for (int s = 0; s < 6; ++s) try_step(rng.unit_vector(n));
        if (!improved) rho *= 0.5;
    }
    return fcur;
}

}  // namespace

D2Estimate d2_estimate(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                       const Eigen::VectorXd& w, std::vector<double> t_schedule, double radius_factor) {
    if (!contains_subgradient(f, x, v))
        throw capability_error("d2_estimate: v is not a subgradient at x");
    if (t_schedule.empty()) {
        for (int i = 0; i <= 6; ++i) t_schedule.push_back(std::pow(10.0, -1.0 - 0.5 * i));
    }
    std::sort(t_schedule.begin(), t_schedule.end(), std::greater<double>());
    Rng rng(0xd2e5ULL);
    std::vector<double> mins;
    mins.reserve(t_schedule.size());
    for (double t : t_schedule) mins.push_back(ball_min_quotient(f, x, v, t, w, radius_factor * t, rng));

    const size_t m = mins.size();
    // Divergence: finest scale beyond 1e3 with at least geometric growth
    // across the last three scales. A constant plateau (honest large
    // curvature) is not flagged.
    auto grows = [](double hi, double lo) {
        if (!std::isfinite(hi)) return true;
        if (!std::isfinite(lo)) return false;
        return hi >= 2.0 * lo - 1e-12;
    };
    bool diverged = false;
    if (m >= 3)
        diverged = mins[m - 1] > 1e3 && grows(mins[m - 1], mins[m - 2]) && grows(mins[m - 2], mins[m - 3]);
    if (!diverged && !std::isfinite(mins.back())) diverged = true;
    if (diverged) return D2Estimate{kInf, true};

    // The ball minimum carries an O(t) bias; one Richardson step over the
    // two finest scales removes it.
    double est = mins.back();
    if (m >= 2 && std::isfinite(mins[m - 2])) {
        const double t1 = t_schedule[m - 1], t2 = t_schedule[m - 2];
        const double extrap = mins[m - 1] + (mins[m - 1] - mins[m - 2]) * t1 / (t2 - t1);
        if (std::abs(extrap - est) <= std::abs(mins[m - 1] - mins[m - 2])) est = extrap;
    }
    return D2Estimate{est, false};
}

QuadraticBundle d2_bundle(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    const int n = f.ambient_dim();
    if (!contains_subgradient(f, x, v))
        throw capability_error("d2_bundle: v is not a subgradient at x");

    if (f.get_if<PolyhedralFn>() || f.get_if<SublinearFn>()) {
        if (!strict_proto_test(f, x, v))
            throw capability_error("subgradient not in relative interior; bundle undefined");
        CriticalCone kc = critical_cone(f, x, v);
        LinealityResult lr = lineality_check(std::get<FinGenConvex>(kc));
        auto* sub = std::get_if<Subspace>(&lr);
        if (!sub)
            throw invariant_error("d2_bundle: critical cone fails the subspace test despite ri membership");
        // Piecewise linear structure carries no curvature.
        return QuadraticBundle{*sub, SymMatrix::zero(sub->dim())};
    }
    if (const auto* g = f.get_if<DecomposableFn>()) {
        if (!nondegeneracy(f, x)) throw capability_error("reliable decomposability violated");
        const Eigen::VectorXd mu = multiplier(f, x, v);
        FinGenConvex face = theta_face(g->theta, xi_value(*g, x));
        if (!ri_membership(face, mu))
            throw capability_error("subgradient not in relative interior; bundle undefined");
        // K_theta = N_face(mu) = (par face)^perp since mu is an ri point;
        // Kbar is its preimage under the Xi Jacobian.
        Subspace par = affine_hull_directions(face);
        const Eigen::MatrixXd jac = xi_jacobian(*g, x);
        Eigen::MatrixXd basis;
        if (par.dim() == 0) {
            basis = Eigen::MatrixXd::Identity(n, n);
        } else {
            basis = null_space(par.basis().transpose() * jac);
        }
        Subspace kbar(n, basis);
        const Eigen::MatrixXd hess = xi_hessian_combo(*g, mu).mat();
        return QuadraticBundle{kbar, SymMatrix(basis.transpose() * hess * basis)};
    }
    if (const auto* sf = f.get_if<SpectralFn>()) {
        if (sf->kind != SpectralFn::Kind::psd_indicator)
            throw capability_error("d2_bundle: spectral support is limited to psd_indicator; "
                                   "supply a decomposable reduction otherwise");
        if (!strict_proto_test(f, x, v))
            throw capability_error("subgradient not in relative interior; bundle undefined");
        CriticalCone kc = critical_cone(f, x, v);
        const auto& desc = std::get<SpectralConeDesc>(kc);
        Subspace kbar = desc.to_subspace_svec();
        // Curvature operator of the PSD reduction: H(W) = -(X+ W V + V W X+)
        // with X+ the pseudo-inverse on the positive block, so that
        // xi^T Abar xi reproduces the second subderivative on Kbar.
        const Eigen::MatrixXd xm = unsvec(x);
        const Eigen::MatrixXd vm = unsvec(v);
        EigResult ex = sym_eig(SymMatrix(xm));
        const double s = 1.0 + ex.values.cwiseAbs().maxCoeff();
        Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(sf->order, sf->order);
        for (int i = 0; i < sf->order; ++i)
            if (ex.values[i] > 1e-8 * s)
                pinv += (1.0 / ex.values[i]) * ex.vectors.col(i) * ex.vectors.col(i).transpose();
        const int d = kbar.dim();
        Eigen::MatrixXd abar(d, d);
        std::vector<Eigen::MatrixXd> basis_mats(d);
        for (int j = 0; j < d; ++j) basis_mats[j] = unsvec(kbar.basis().col(j));
        for (int j = 0; j < d; ++j) {
            const Eigen::MatrixXd hw = -(pinv * basis_mats[j] * vm + vm * basis_mats[j] * pinv);
            for (int i = 0; i < d; ++i) abar(i, j) = (basis_mats[i].array() * hw.array()).sum();
        }
        return QuadraticBundle{kbar, SymMatrix(abar)};
    }
    const auto* c = f.get_if<Custom1DConvex>();
    // 1-D smooth convex member: full domain, curvature from the derivative
    // oracle by central differences.
    return QuadraticBundle{Subspace::full(1),
                           SymMatrix(Eigen::MatrixXd::Constant(1, 1, second_derivative_fd(*c, x[0])))};
}

GraphDerivative graphical_derivative(const QuadraticBundle& b, const Eigen::VectorXd& w) {
    GraphDerivative out;
    if (b.kbar.residual(w) > 1e-9 * (1.0 + w.norm())) return out;
    out.empty = false;
    const Eigen::VectorXd xi = b.kbar.basis().transpose() * w;
    out.base = b.kbar.basis() * (b.abar.mat() * xi);
    out.directions = b.kbar.orthogonal_complement();
    return out;
}

double d2_value_closed(const QuadraticBundle& b, const Eigen::VectorXd& w) {
    if (b.kbar.residual(w) > 1e-9 * (1.0 + w.norm())) return kInf;
    const Eigen::VectorXd xi = b.kbar.basis().transpose() * w;
    return xi.dot(b.abar.mat() * xi);
}

bool sublinear_sted_test(const SublinearFn& theta, const Eigen::VectorXd& mu) {
    if (!fgc_contains(theta.d0, mu, 1e-8))
        throw capability_error("sublinear_sted_test: mu is not in the base subdifferential");
    return ri_membership(theta.d0, mu);
}

}  // namespace protoreg
