#include "protoreg/proto.hpp"

#include <cmath>

#include "protoreg/errors.hpp"
#include "protoreg/rng.hpp"

namespace protoreg {

namespace {

// Rank with the marginal band bookkeeping of the spectral test.
struct RankInfo {
    int rank = 0;
    bool marginal = false;
};

RankInfo banded_rank(const Eigen::VectorXd& eigs) {
    const double s = 1.0 + eigs.cwiseAbs().maxCoeff();
    RankInfo out;
    for (int i = 0; i < eigs.size(); ++i) {
        const double a = std::abs(eigs[i]);
        if (a > 1e-8 * s) ++out.rank;
        else if (a > 1e-10 * s) out.marginal = true;
    }
    return out;
}

}  // namespace

ProtoResult strict_proto_test_detailed(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    if (!contains_subgradient(f, x, v))
        throw capability_error("strict_proto_test: v is not a subgradient at x");

    if (f.get_if<PolyhedralFn>() || f.get_if<SublinearFn>()) {
        Subdiff sd = subdifferential(f, x);
        return ProtoResult{ri_membership(std::get<FinGenConvex>(sd), v), false};
    }
    if (const auto* g = f.get_if<DecomposableFn>()) {
        if (!nondegeneracy(f, x)) throw capability_error("reliable decomposability violated");
        const Eigen::VectorXd mu = multiplier(f, x, v);
        FinGenConvex face = theta_face(g->theta, xi_value(*g, x));
        return ProtoResult{ri_membership(face, mu), false};
    }
    if (const auto* sf = f.get_if<SpectralFn>()) {
        if (sf->kind == SpectralFn::Kind::psd_indicator) {
            EigResult ex = sym_eig(SymMatrix(unsvec(x)));
            EigResult ev = sym_eig(SymMatrix(unsvec(v)));
            RankInfo rx = banded_rank(ex.values);
            RankInfo rv = banded_rank(ev.values);
            return ProtoResult{rx.rank + rv.rank == sf->order, rx.marginal || rv.marginal};
        }
        if (sf->kind == SpectralFn::Kind::sum_k_largest) {
            Subdiff sd = subdifferential(f, x);
            return ProtoResult{spectral_subdiff_ri(std::get<SpectralSubdiff>(sd), unsvec(v)), false};
        }
        throw capability_error("strict_proto_test: leading_eig requires a decomposable reduction");
    }
    // Custom 1-D members are C^2-smooth convex by catalog contract; their
    // subdifferential is the singleton {f'(x)} and the test is vacuous.
    return ProtoResult{true, false};
}

bool strict_proto_test(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    return strict_proto_test_detailed(f, x, v).strict;
}

bool prox_c1_predict(const FnHandle& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    return strict_proto_test(f, x, v);
}

bool ri_stability_scan(const SublinearFn& theta, const Eigen::VectorXd& mu_bar, double eps, int samples) {
    if (!ri_membership(theta.d0, mu_bar))
        throw capability_error("ri_stability_scan: mu_bar is not in ri of the base subdifferential");
    const int p = theta.ambient_dim();

    // Graph points: z ranges over the critical subspace N_{d0}(mu_bar),
    // which is the orthogonal complement of the affine-hull directions.
    Subspace par = affine_hull_directions(theta.d0);
    Subspace crit = par.orthogonal_complement();
    Rng rng(0x5ca11ab1eULL);

    auto check_pair = [&](const Eigen::VectorXd& z) {
        FinGenConvex face = theta_face(theta, z);
        std::vector<Eigen::VectorXd> probes;
        probes.push_back(mu_bar);
        for (const auto& vert : face.vertices) {
            const double dist = (vert - mu_bar).norm();
            if (dist <= 1e-14) continue;
            const double t = std::max(0.0, 1.0 - eps / dist);
            probes.push_back(vert + t * (mu_bar - vert));
        }
        for (const auto& mu : probes) {
            if (!ri_membership(theta.d0, mu)) return false;
            if (!ri_membership(face, mu)) return false;
        }
        return true;
    };

    if (crit.dim() == 0) return check_pair(Eigen::VectorXd::Zero(p));
    const int count = std::max(1, samples);
    for (int s = 0; s < count; ++s) {
        // Log-spaced radii within eps.
        const double radius = eps * std::pow(10.0, -3.0 * rng.uniform());
        Eigen::VectorXd coeff = rng.unit_vector(crit.dim());
        Eigen::VectorXd z = radius * (crit.basis() * coeff);
        if (!check_pair(z)) return false;
    }
    return true;
}

}  // namespace protoreg
