#include "cfslab/holes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfslab/errors.hpp"

namespace cfslab {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::MatrixXcd drop_column(const Eigen::MatrixXcd& A, Eigen::Index k) {
    Eigen::MatrixXcd out(A.rows(), A.cols() - 1);
    for (Eigen::Index c = 0, o = 0; c < A.cols(); ++c)
        if (c != k) out.col(o++) = A.col(c);
    return out;
}

cplx det_or_one(const Eigen::MatrixXcd& A) { return A.size() == 0 ? cplx(1.0) : A.determinant(); }

// Gram matrix of a family on a fresh basis copy, so that a different rule is not masked by the cache.
Eigen::MatrixXcd fresh_basis_gram(const SolutionFamily& f, const EvalOptions& opt) {
    SolutionFamily g(f.basis(), f.coeffs());
    return g.basis_gram(opt);
}

double hermitian_norm(const Eigen::MatrixXcd& H) {
    if (H.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXcd gram_determinant_coefficients(const Eigen::MatrixXcd& G, GramMinors* minors) {
    const Eigen::Index n = G.rows();
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    GramMinors mm;
    mm.diag = Eigen::VectorXcd::Ones(n);
    mm.off = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // rows j < i, columns k <= i
        const Eigen::MatrixXcd Gi = G.block(0, 0, i, i + 1);
        const cplx dii = det_or_one(drop_column(Gi, i));
        if (std::abs(dii) < 1e-300 || !std::isfinite(std::abs(dii)))
            throw DegenerateFamily("gram_determinant_orthogonalize: vanishing Gram minor at i = " + std::to_string(i));
        mm.diag(i) = dii;
        for (Eigen::Index k = 0; k <= i; ++k) {
            const cplx dk = k == i ? dii : det_or_one(drop_column(Gi, k));
            if (k < i) mm.off(i, k) = dk;
            const double sgn = ((i + k) % 2 == 0) ? 1.0 : -1.0;
            C(k, i) = sgn * dk / dii;
        }
    }
    if (minors) *minors = std::move(mm);
    return C;
}

Eigen::MatrixXcd gram_schmidt_coefficients(const Eigen::MatrixXcd& G) {
    const Eigen::Index n = G.rows();
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    auto ip = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a.adjoint() * G * b)(0, 0); };
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Unit(n, i);
        for (Eigen::Index j = 0; j < i; ++j) v -= ip(C.col(j), v) * C.col(j);
        const double nv = std::sqrt(std::max(ip(v, v).real(), 0.0));
        if (nv < 1e-150) throw DegenerateFamily("gram_schmidt: dependent vector at i = " + std::to_string(i));
        C.col(i) = v / nv;
    }
    return C;
}

SolutionFamily gram_determinant_orthogonalize(const SolutionFamily& phi, const EvalOptions& opt, GramMinors* minors) {
    const Eigen::MatrixXcd C = gram_determinant_coefficients(phi.gram(opt), minors);
    return phi.with_coeffs(phi.coeffs() * C);
}

SolutionFamily normalized(const SolutionFamily& f, const EvalOptions& opt) {
    const Eigen::MatrixXcd G = f.gram(opt);
    Eigen::MatrixXcd c = f.coeffs();
    for (Eigen::Index i = 0; i < c.cols(); ++i) {
        const double n2 = G(i, i).real();
        if (!(n2 > 0.0)) throw DegenerateFamily("normalized: zero member");
        c.col(i) /= std::sqrt(n2);
    }
    return f.with_coeffs(std::move(c));
}

ApproximatingSet make_approximating_set(const SolutionFamily& target, double delta, double epsilon_tol,
                                        const EvalOptions& opt) {
    std::vector<WavePacket> pert;
    pert.reserve(target.basis().size());
    for (WavePacket u : target.basis()) {
        u.width *= 1.0 + delta;
        if (u.kind == ProfileKind::gaussian) u.amplitude *= std::pow(1.0 + delta, -1.5);
        u.center.x(0) += delta / u.mass;
        pert.push_back(std::move(u));
    }
    const Eigen::Index nb = static_cast<Eigen::Index>(target.basis().size());
    const Eigen::Index n = static_cast<Eigen::Index>(target.size());

    // union basis: target packets, then the perturbed copies
    std::vector<WavePacket> basis = target.basis();
    basis.insert(basis.end(), pert.begin(), pert.end());
    Eigen::MatrixXcd cu = Eigen::MatrixXcd::Zero(2 * nb, n), cp = Eigen::MatrixXcd::Zero(2 * nb, n);
    cu.topRows(nb) = target.coeffs();
    cp.bottomRows(nb) = target.coeffs();
    SolutionFamily all(basis, cu);
    all.basis_gram(opt);

    ApproximatingSet a;
    a.epsilon_tol = epsilon_tol;
    a.target = all;
    const SolutionFamily phi = normalized(all.with_coeffs(cp), opt);
    const Eigen::MatrixXcd G = all.basis_gram(opt);
    a.eps_prime = (cu.adjoint() * G * phi.coeffs() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();

    const SolutionFamily orth = gram_determinant_orthogonalize(phi, opt, &a.minors);
    a.psi = normalized(orth, opt);

    a.overlap = cu.adjoint() * G * a.psi.coeffs();
    a.overlap_defect = (a.overlap - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXcd d = cu.col(i) - a.psi.coeffs().col(i);
        a.max_distance = std::max(a.max_distance, std::sqrt(std::max((d.adjoint() * G * d)(0, 0).real(), 0.0)));
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.overlap);
    const double smin = n ? svd.singularValues()(n - 1) : 1.0;
    if (n && (!(smin > 0.0) || svd.singularValues()(0) / smin > 1e12))
        throw DegenerateFamily("make_approximating_set: overlap matrix is singular");
    a.overlap_inverse_norm = n ? 1.0 / smin : 0.0;
    return a;
}

Projection project_out(const SolutionFamily& phi, const ApproximatingSet& aset, const EvalOptions& opt) {
    const Eigen::Index n = static_cast<Eigen::Index>(aset.target.size());
    const Eigen::Index q = static_cast<Eigen::Index>(phi.size());
    // shared basis: aset basis followed by the basis of phi
    const SolutionFamily space = aset.target.joined(phi);
    const Eigen::Index nb = static_cast<Eigen::Index>(aset.target.basis().size());
    const Eigen::Index rows = space.coeffs().rows();

    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(rows, n), P = Eigen::MatrixXcd::Zero(rows, n);
    U.topRows(nb) = aset.target.coeffs();
    P.topRows(nb) = aset.psi.coeffs();
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(rows, q);
    F.bottomRows(rows - nb) = phi.coeffs();

    const Eigen::MatrixXcd& G = space.basis_gram(opt);
    const Eigen::MatrixXcd M = U.adjoint() * G * P;
    const Eigen::MatrixXcd D = U.adjoint() * G * F;

    Projection pr;
    if (n > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
        const double smin = svd.singularValues()(n - 1);
        if (!(smin > 0.0) || svd.singularValues()(0) / smin > 1e12)
            throw DegenerateFamily("project_out: overlap matrix is singular; not an approximating set");
        pr.overlap_inverse_norm = 1.0 / smin;
        pr.lambda = M.fullPivLu().solve(D);
    } else {
        pr.lambda = Eigen::MatrixXcd::Zero(0, q);
    }
    pr.bound_applicable = n > 0 && pr.overlap_inverse_norm < 2.0;
    const Eigen::MatrixXcd Psi = F - P * pr.lambda;
    pr.psi_phi = space.with_coeffs(Psi);

    EvalOptions fine = opt;
    fine.hermite_min = std::max(2 * opt.hermite_min, 48);
    fine.hermite_rel = std::min(opt.hermite_rel, 1e-12);
    fine.quad.rel_tol = std::min(opt.quad.rel_tol, 1e-13);
    const Eigen::MatrixXcd G2 = fresh_basis_gram(space, fine);
    const Eigen::MatrixXcd over = U.adjoint() * G2 * Psi;

    pr.orthogonality.resize(q);
    pr.phi_norm.resize(q);
    pr.lambda_norm.resize(q);
    for (Eigen::Index c = 0; c < q; ++c) {
        pr.orthogonality(c) = n ? over.col(c).cwiseAbs().maxCoeff() : 0.0;
        pr.phi_norm(c) = std::sqrt(std::max((F.col(c).adjoint() * G * F.col(c))(0, 0).real(), 0.0));
        pr.lambda_norm(c) = pr.lambda.col(c).norm();
    }
    return pr;
}

MicroBehaviour micro_behaviour(const SolutionFamily& psi, const SpacetimePoint& x, double eps, double m,
                               const EvalOptions& opt) {
    MicroBehaviour mb;
    if (psi.size() == 0) {
        mb.macroscopic = true;
        return mb;
    }
    mb.density = psi.values(x, nullptr, opt).norm();
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += family_jacobian_sup(psi, static_cast<int>(i), x, eps, opt);
    mb.gradient = eps * s;
    mb.value = mb.density + mb.gradient;
    mb.macroscopic = mb.value < 1e9 * std::pow(m, 1.5);
    return mb;
}

AnalyticHoleBound hole_bound_general(double lambda, double eps, double m, double micro) {
    AnalyticHoleBound b;
    b.lambda = lambda;
    const double c = std::pow(2.0 * pi, 0.75) * std::pow(m, -1.5);
    b.a = std::pow(2.0, 7) * (1.0 + lambda) * m * eps + c * std::pow(lambda, -1.5) * micro;
    b.b = std::pow(2.0, 11) * (lambda + 1.0 / lambda + 1.0) * m * eps +
          4.0 * c * (std::pow(lambda, -1.5) + std::pow(lambda, -2.5)) * micro;
    b.holds = b.a < 0.25 && b.b < 0.25;
    return b;
}

AnalyticHoleBound hole_bound_extreme(double eps, double m, double micro) {
    AnalyticHoleBound b;
    b.lambda = 1e8;
    const double c = std::pow(2.0 * pi, 0.75) * std::pow(m, -1.5);
    b.a = 1e11 * m * eps + c * 1e-12 * micro;
    b.b = 3e12 * m * eps + 8.0 * c * 1e-12 * micro;
    b.holds = b.a < 0.25 && b.b < 0.25;
    return b;
}

std::array<SpecialSolution, 4> special_solutions(double sigma, const SpacetimePoint& x0, double m) {
    return {SpecialSolution{special_b(Spin::up, sigma, x0, m), -1.0, 0},
            SpecialSolution{special_b(Spin::down, sigma, x0, m), 1.0, 1},
            SpecialSolution{special_a(Spin::up, sigma, x0, m), 1.0, 2},
            SpecialSolution{special_a(Spin::down, sigma, x0, m), 1.0, 3}};
}

HoleRegularityReport hole_regularity_experiment(const ApproximatingSet* aset, const SpacetimePoint& x0,
                                                const CutoffProfile& g, double sigma, double m,
                                                const EvalOptions& opt) {
    const auto sp = special_solutions(sigma, x0, m);
    std::vector<WavePacket> pk;
    for (const auto& s : sp) pk.push_back(s.packet);
    const SolutionFamily specials(pk);

    HoleRegularityReport rep;
    SolutionFamily fam = specials;
    if (aset && aset->target.size() > 0) {
        Projection pr = project_out(specials, *aset, opt);
        fam = pr.psi_phi;
        rep.lambda = pr.lambda;
        rep.micro = micro_behaviour(aset->psi, x0, g.epsilon(), m, opt);
    } else {
        rep.lambda = Eigen::MatrixXcd::Zero(0, 4);
        rep.micro.macroscopic = true;
    }
    rep.values = fam.values(x0, &g, opt);
    rep.spin = spin_space_report(correlation_from_values(rep.values, x0).M);
    for (int a = 0; a < 4; ++a)
        rep.direct[static_cast<std::size_t>(a)] =
            (rep.values.col(a) / sp[static_cast<std::size_t>(a)].C - unit_spinor(sp[static_cast<std::size_t>(a)].mu))
                .norm();
    rep.desk = hole_bound_general(sigma / m, g.epsilon(), m, rep.micro.value);
    rep.extreme = hole_bound_extreme(g.epsilon(), m, rep.micro.value);
    return rep;
}

DegeneracyReport hole_degeneracy(const Eigen::MatrixXcd& R, double tau) {
    const Eigen::MatrixXcd F = correlation_from_values(R).M;
    const Eigen::MatrixXcd Q = range_complement(F, tau);
    DegeneracyReport d;
    d.f_norm = hermitian_norm(F);
    d.remaining = static_cast<int>(Q.cols());
    d.removed = static_cast<int>(F.cols() - Q.cols());
    d.f0_norm = Q.cols() ? hermitian_norm(Q.adjoint() * F * Q) : 0.0;
    return d;
}

DegeneracyReport hole_degeneracy(const Eigen::MatrixXcd& R, const Eigen::MatrixXcd& hole) {
    const Eigen::MatrixXcd F = correlation_from_values(R).M;
    const Eigen::Index N = F.rows();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(hole);
    const Eigen::MatrixXcd full = qr.householderQ() * Eigen::MatrixXcd::Identity(N, N);
    const Eigen::MatrixXcd Q = full.rightCols(N - hole.cols());
    DegeneracyReport d;
    d.f_norm = hermitian_norm(F);
    d.removed = static_cast<int>(hole.cols());
    d.remaining = static_cast<int>(Q.cols());
    d.f0_norm = Q.cols() ? hermitian_norm(Q.adjoint() * F * Q) : 0.0;
    return d;
}

PerturbationCase eigenvalue_perturbation_experiment(const std::vector<WavePacket>& states, const SpacetimePoint& x,
                                                    const CutoffProfile& g, const DiagonalSpectrum& d,
                                                    double scale, const EvalOptions& opt) {
    PerturbationCase pc;
    std::vector<PerturbedState> ps;
    double value_sq = 0.0, gradient_part = 0.0;
    for (Energy e : {Energy::positive, Energy::negative}) {
        std::vector<WavePacket> grp;
        for (const auto& s : states)
            if (s.sign == e) grp.push_back(s);
        if (grp.empty()) continue;
        const SolutionFamily f = orthonormalize_family(SolutionFamily(grp), opt);
        const Eigen::MatrixXcd R = scale * f.values(x, &g, opt);
        const Eigen::MatrixXcd U = scale * f.values(x, nullptr, opt);
        for (Eigen::Index i = 0; i < R.cols(); ++i) {
            ps.push_back({R.col(i), e});
            pc.density_sum += R.col(i).squaredNorm();
        }
        double grad = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            grad += family_jacobian_sup(f, static_cast<int>(i), x, g.epsilon(), opt);
        value_sq += U.squaredNorm();
        gradient_part += std::abs(scale) * g.epsilon() * grad;
    }
    pc.micro = std::sqrt(value_sq) + gradient_part;
    pc.diag = perturbed_diagonal(d, ps);
    pc.lifted_norm = 2.0 * pi * pc.diag.delta_norm;
    pc.max_distance = ps.empty() ? 0.0 : pc.diag.distances.maxCoeff();
    pc.bauer_fike = pc.max_distance <= pc.diag.delta_norm * (1.0 + 1e-12) + 1e-300;
    pc.lifted = 2.0 * pi * pc.max_distance <= 2.0 * pc.micro * pc.micro;
    return pc;
}

double min_singular_value(const Eigen::MatrixXcd& V) {
    if (V.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace cfslab
