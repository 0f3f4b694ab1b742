#include "doctest.h"

#include "cfslab/correlation.hpp"
#include "cfslab/experiments.hpp"
#include "cfslab/holes.hpp"

using namespace cfslab;

namespace {

SolutionFamily special_family(double sigma, const SpacetimePoint& x0) {
    std::vector<WavePacket> p;
    for (const auto& s : special_solutions(sigma, x0, 1.0)) p.push_back(s.packet);
    return orthonormalize_family(SolutionFamily(p));
}

Eigen::MatrixXcd random_values(Rng& r, int rows, int cols) {
    Eigen::MatrixXcd R(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) R(i, j) = cplx(r.uniform(-1, 1), r.uniform(-1, 1));
    return R;
}

}  // namespace

TEST_CASE("local correlation matrices have at most two eigenvalues of each sign") {
    Rng r(4);
    for (int n : {1, 2, 3, 4, 6, 9}) {
        const CorrelationMatrix M = correlation_from_values(random_values(r, 4, n));
        const SpinSpaceReport s = spin_space_report(M.M);
        CHECK(s.hermiticity_defect <= 1e-12);
        CHECK(s.n_plus <= 2);
        CHECK(s.n_minus <= 2);
        CHECK(s.rank == std::min(n, 4));
    }
}

TEST_CASE("rank deficient values give a degenerate matrix") {
    Rng r(6);
    Eigen::MatrixXcd R = random_values(r, 4, 5);
    R.row(3).setZero();
    R.row(2).setZero();
    const SpinSpaceReport s = spin_space_report(correlation_from_values(R).M);
    CHECK(s.rank == 2);
    CHECK_FALSE(s.regular);
    CHECK(range_complement(correlation_from_values(R).M).cols() == 3);
}

TEST_CASE("special family is regular with signature (2,2)") {
    const SpacetimePoint x0(0.3, 0.1, -0.2, 0.4);
    const SolutionFamily f = special_family(1.0, x0);
    for (double eps : {0.01, 0.1}) {
        const CorrelationMatrix M = correlation_matrix(f, x0, CutoffProfile::sharp(eps));
        const SpinSpaceReport s = spin_space_report(M.M);
        CHECK(s.rank == 4);
        CHECK(s.n_plus == 2);
        CHECK(s.n_minus == 2);
        CHECK(s.regular);
    }
}

TEST_CASE("isometry between the two evaluation paths") {
    const SpacetimePoint x0(0.3, 0.1, -0.2, 0.4);
    const IsometryReport iso = isometry_check(special_family(1.0, x0), x0, CutoffProfile::sharp(0.1));
    CHECK(iso.max_deviation <= 1e-12);
    CHECK(iso.image_dimension == 4);
    CHECK(iso.surjective);
}

TEST_CASE("spectra are translation covariant") {
    const SpacetimePoint x0(0.3, 0.1, -0.2, 0.4);
    const SolutionFamily f = special_family(1.0, x0);
    Rng r(12);
    for (int i = 0; i < 3; ++i) {
        const SpacetimePoint a(r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1));
        const TranslationReport t = translation_covariance_check(f, x0, a, CutoffProfile::sharp(0.1));
        CHECK(t.spectral_deviation <= 1e-10);
        CHECK(t.norm_left == doctest::Approx(t.norm_right).epsilon(1e-10));
    }
}

TEST_CASE("currents from spin products and from traces agree") {
    Rng r(8);
    const Eigen::MatrixXcd R = random_values(r, 4, 3);
    CHECK(current_density(R, 0) == doctest::Approx(R.squaredNorm()).epsilon(1e-12));
    for (int mu = 0; mu < 4; ++mu)
        CHECK(std::abs(current_density(R, mu) - current_trace(R, mu)) <= 1e-12 * R.squaredNorm());
}

TEST_CASE("injectivity probe separates points and flags a single mode") {
    const SolutionFamily f = special_family(1.0, {});
    std::vector<SpacetimePoint> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(SpacetimePoint(0, i, 0, 0));
    const CutoffProfile g = CutoffProfile::sharp(0.1);
    const InjectivityReport a = injectivity_probe(f, pts, g);
    CHECK(a.separated);
    CHECK(a.min_distance > a.threshold);
    const InjectivityReport b = injectivity_probe(single_mode_family(Vec3(0.3, 0, 0), 0.1, 1.0), pts, g);
    CHECK_FALSE(b.separated);
}

TEST_CASE("lattice eigenbasis diagonalises F") {
    const CutoffProfile g = CutoffProfile::sharp(0.3);
    LatticeSpec ls;
    ls.n = 6;
    const LatticeSea sea = make_lattice_sea(ls, g, 1.0);
    const Eigenbasis eb = eigenbasis_at_point(sea, SpacetimePoint(0.1, 0.2, 0, 0), g, diagonal_spectrum(g, 1.0));
    for (int mu = 0; mu < 4; ++mu) CHECK(eb.residual(mu) <= 1e-10);
    CHECK(eb.eigenvalues(0) < 0.0);
    CHECK(eb.eigenvalues(3) > 0.0);
}
