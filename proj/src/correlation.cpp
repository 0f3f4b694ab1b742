#include "cfslab/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfslab/errors.hpp"
#include "cfslab/parallel.hpp"

namespace cfslab {

namespace {
constexpr double pi = std::numbers::pi;
}

CorrelationMatrix correlation_from_values(const Eigen::MatrixXcd& R, const SpacetimePoint& x) {
    if (R.rows() != 4) throw InvalidArgument("correlation: values must have four rows");
    CorrelationMatrix c;
    c.values = R;
    c.x = x;
    c.M = -(R.adjoint() * gamma(0) * R);
    return c;
}

CorrelationMatrix correlation_matrix(const SolutionFamily& f, const SpacetimePoint& x, const CutoffProfile& g,
                                     const EvalOptions& opt) {
    return correlation_from_values(f.values(x, &g, opt), x);
}

SpinSpaceReport spin_space_report(const Eigen::MatrixXcd& M, double tau) {
    if (M.rows() != M.cols()) throw InvalidArgument("spin_space_report: matrix must be square");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("spin_space_report: threshold must lie in (0, 1)");
    SpinSpaceReport r;
    if (M.rows() == 0) return r;
    r.hermiticity_defect = (M - M.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    r.eigenvalues = es.eigenvalues();
    const double top = r.eigenvalues.cwiseAbs().maxCoeff();
    r.threshold = tau * top;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
        const double v = r.eigenvalues(i);
        if (top > 0.0 && std::abs(v) > r.threshold) {
            keep.push_back(i);
            if (v > 0.0)
                ++r.n_plus;
            else
                ++r.n_minus;
        }
    }
    r.rank = static_cast<int>(keep.size());
    r.regular = r.rank == 4;
    r.range_basis.resize(M.rows(), r.rank);
    for (std::size_t i = 0; i < keep.size(); ++i) r.range_basis.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
    return r;
}

Eigen::MatrixXcd range_complement(const Eigen::MatrixXcd& M, double tau) {
    const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (!(top > 0.0) || std::abs(es.eigenvalues()(i)) <= tau * top) keep.push_back(i);
    Eigen::MatrixXcd Q(M.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) Q.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
    return Q;
}

IsometryReport isometry_check(const SolutionFamily& f, const SpacetimePoint& x, const CutoffProfile& g,
                              const EvalOptions& opt) {
    const CorrelationMatrix C = correlation_matrix(f, x, g, opt);
    // Pointwise path: each member evaluated on its own.
    const auto& B = f.basis();
    const Eigen::Index n = static_cast<Eigen::Index>(f.size());
    std::vector<Bispinor> vals(f.size(), Bispinor::Zero());
    parallel_for(f.size(), [&](std::size_t i) {
        Bispinor acc = Bispinor::Zero();
        for (std::size_t k = 0; k < B.size(); ++k) {
            const cplx c = f.coeffs()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
            if (c != cplx(0.0)) acc += c * evaluate_with(B[k], x, &g, opt);
        }
        vals[i] = acc;
    });
    IsometryReport r;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            r.max_deviation = std::max(r.max_deviation, std::abs(-C.M(i, j) - spin_product(vals[i], vals[j])));
    if (n > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C.values);
        const auto& s = svd.singularValues();
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(0) > 0.0 && s(i) > 1e-8 * s(0)) ++r.image_dimension;
    }
    r.surjective = r.image_dimension == 4;
    return r;
}

double current_density(const Eigen::MatrixXcd& R, int mu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < R.cols(); ++i) {
        const Bispinor v = R.col(i);
        acc += spin_product(v, gamma(mu) * v).real();
    }
    return acc;
}

double current_trace(const Eigen::MatrixXcd& R, int mu) {
    const Eigen::MatrixXcd Fmu = -(R.adjoint() * gamma(0) * gamma(mu) * R);
    return -Fmu.trace().real();
}

TranslationReport translation_covariance_check(const SolutionFamily& f, const SpacetimePoint& x,
                                               const SpacetimePoint& a, const CutoffProfile& g,
                                               const EvalOptions& opt) {
    const Eigen::MatrixXcd Ml = correlation_matrix(f, x + a, g, opt).M;
    const Eigen::MatrixXcd Mr = correlation_matrix(f.translated(a), x, g, opt).M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> el(0.5 * (Ml + Ml.adjoint()), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> er(0.5 * (Mr + Mr.adjoint()), Eigen::EigenvaluesOnly);
    TranslationReport r;
    if (Ml.size() > 0) r.spectral_deviation = (el.eigenvalues() - er.eigenvalues()).cwiseAbs().maxCoeff();
    r.norm_left = operator_norm(Ml);
    r.norm_right = operator_norm(Mr);
    return r;
}

// ---- lattice sea -------------------------------------------------------------------

LatticeSea make_lattice_sea(const LatticeSpec& lat, const CutoffProfile& g, double m) {
    auto modes = lattice_modes(lat, g, Energy::negative, m);
    std::vector<WavePacket> kept;
    for (auto& u : modes) {
        const double w = lat.cell_average ? cell_mean_square(g, u.momentum, u.cell_half) : std::pow(g(u.momentum.norm()), 2);
        if (w > 0.0) kept.push_back(std::move(u));
    }
    if (kept.empty()) throw InvalidArgument("lattice sea: the cutoff vanishes on every cell");
    LatticeSea s;
    s.family = SolutionFamily(std::move(kept));
    s.spec = lat;
    return s;
}

Eigenbasis eigenbasis_at_point(const LatticeSea& sea, const SpacetimePoint& x, const CutoffProfile& g,
                               const DiagonalSpectrum& d, const EvalOptions& opt) {
    EvalOptions o = opt;
    o.cell_average = sea.spec.cell_average;
    const Eigen::MatrixXcd R = sea.family.values(x, &g, o);
    Eigenbasis e;
    e.coeffs = -(R.adjoint() * gamma(0)) / (2.0 * pi);  // column mu is c_mu
    e.lattice_kernel = -(R * R.adjoint() * gamma(0)) / (2.0 * pi);
    for (int mu = 0; mu < 4; ++mu) {
        const Eigen::VectorXcd c = e.coeffs.col(mu);
        const Eigen::VectorXcd Fc = -(R.adjoint() * (gamma(0) * (R * c)));
        e.eigenvalues(mu) = (c.dot(Fc) / c.squaredNorm()).real();
        e.lattice_lambda(mu) = e.lattice_kernel(mu, mu).real();
        e.residual(mu) = (Fc - 2.0 * pi * e.lattice_lambda(mu) * c).norm() / Fc.norm();
        e.expected(mu) = 2.0 * pi * (mu < 2 ? d.lambda_minus : d.lambda_plus);
    }
    return e;
}

Eigen::MatrixXcd translate_coefficients(const SolutionFamily& modes, const Eigen::MatrixXcd& c, const SpacetimePoint& a) {
    const auto& B = modes.basis();
    if (static_cast<Eigen::Index>(B.size()) != c.rows()) throw InvalidArgument("translate_coefficients: size mismatch");
    if (!modes.coeffs().isIdentity(0.0)) throw InvalidArgument("translate_coefficients: expects a plain mode basis");
    Eigen::MatrixXcd out = c;
    for (std::size_t n = 0; n < B.size(); ++n) {
        if (B[n].kind != ProfileKind::mode) throw InvalidArgument("translate_coefficients: expects mode packets");
        const cplx ph = translate(B[n], a).lambda(B[n].momentum) / B[n].lambda(B[n].momentum);
        out.row(static_cast<Eigen::Index>(n)) *= ph;
    }
    return out;
}

// ---- injectivity ---------------------------------------------------------------------

InjectivityReport injectivity_probe(const SolutionFamily& f, const std::vector<SpacetimePoint>& points,
                                    const CutoffProfile& g, const EvalOptions& opt) {
    if (points.size() < 2) throw InvalidArgument("injectivity_probe: needs at least two points");
    std::vector<Eigen::MatrixXcd> F(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) F[i] = correlation_matrix(f, points[i], g, opt).M;
    InjectivityReport r;
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    r.distances = Eigen::MatrixXd::Zero(n, n);
    r.min_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        r.max_norm = std::max(r.max_norm, operator_norm(F[i]));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = operator_norm(F[i] - F[j]);
            r.distances(i, j) = r.distances(j, i) = d;
            if (d < r.min_distance) {
                r.min_distance = d;
                r.argmin_i = static_cast<int>(i);
                r.argmin_j = static_cast<int>(j);
            }
        }
    }
    r.threshold = 1e-10 * r.max_norm;
    r.separated = r.min_distance > r.threshold;
    return r;
}

SolutionFamily single_mode_family(const Vec3& k, double cell_half, double m) {
    return SolutionFamily({mode_packet(Energy::negative, Spin::up, k, cell_half, m),
                           mode_packet(Energy::negative, Spin::down, k, cell_half, m)});
}

}  // namespace cfslab
