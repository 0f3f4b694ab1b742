#include "doctest.h"

#include <cmath>

#include "cfslab/experiments.hpp"
#include "cfslab/kernel.hpp"
#include "oracle.hpp"

using namespace cfslab;

TEST_CASE("diagonal kernel equals the closed form and has the stated spectrum") {
    const double m = 1.0;
    const CutoffProfile g = CutoffProfile::sharp(0.1);
    const DiagonalSpectrum d = diagonal_spectrum(g, m);
    const SpinMatrix K = kernel({}, g, Energy::negative, KernelPower::double_, m).value;
    CHECK((K - diagonal_closed_form(d, Energy::negative)).cwiseAbs().maxCoeff() <= 1e-10 * K.cwiseAbs().maxCoeff());
    CHECK(d.lambda_plus == doctest::Approx(1.54035).epsilon(1e-4));
    CHECK(d.lambda_minus == doctest::Approx(-1.14728).epsilon(1e-4));
    CHECK(d.lambda_minus < 0.0);
}

TEST_CASE("lambda_minus stays negative across cutoffs") {
    for (double eps : {1.0, 0.3, 0.1, 0.01}) {
        CHECK(diagonal_spectrum(CutoffProfile::sharp(eps), 1.0).lambda_minus < 0.0);
        CHECK(diagonal_spectrum(CutoffProfile::gaussian(eps), 1.0).lambda_minus < 0.0);
    }
}

TEST_CASE("leading order approaches the exact eigenvalues as eps shrinks") {
    double prev = 1.0;
    for (double eps : {0.1, 0.03, 0.01}) {
        const DiagonalSpectrum d = diagonal_spectrum(CutoffProfile::sharp(eps), 1.0);
        const DiagonalSpectrum lo = sharp_leading_order(eps, 1.0);
        const double e = std::abs(lo.lambda_plus / d.lambda_plus - 1.0);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("kernel off the diagonal agrees with direct 3D quadrature") {
    const CutoffProfile g = CutoffProfile::gaussian(0.3);
    const SpacetimePoint xi(0.2, 0.5, -0.3, 0.7);
    for (Energy s : {Energy::negative, Energy::positive}) {
        const SpinMatrix K = kernel(xi, g, s, KernelPower::double_, 1.0).value;
        const SpinMatrix O = oracle::kernel(xi, g, 2, s, 1.0, 25.0, 16, 16, 64, 64);
        CHECK((K - O).cwiseAbs().maxCoeff() <= 1e-8 * K.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("kernel conjugation symmetry") {
    const CutoffProfile g = CutoffProfile::sharp(0.3);
    const SpacetimePoint xi(0.4, -0.2, 0.6, 0.1);
    const SpinMatrix a = kernel(xi, g, Energy::negative, KernelPower::double_, 1.0).value;
    const SpinMatrix b = kernel(-xi, g, Energy::negative, KernelPower::double_, 1.0).value;
    CHECK((b - gamma(0) * a.adjoint() * gamma(0)).cwiseAbs().maxCoeff() <= 1e-10 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("lattice sums converge to the kernel") {
    const CutoffProfile g = CutoffProfile::sharp(0.3);
    const SpinMatrix K = kernel({}, g, Energy::negative, KernelPower::double_, 1.0).value;
    double prev = 1e300;
    for (int n : {8, 16}) {
        LatticeSpec ls;
        ls.n = n;
        const LatticeKernel L = kernel_from_lattice_sum({}, {}, ls, g, Energy::negative, 1.0);
        const double e = (L.value - K).cwiseAbs().maxCoeff() / K.cwiseAbs().maxCoeff();
        CHECK(e < prev);
        prev = e;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("Bauer-Fike bound for perturbed diagonals") {
    const DiagonalSpectrum d = diagonal_spectrum(CutoffProfile::sharp(0.1), 1.0);
    Rng r(21);
    for (int c = 0; c < 10; ++c) {
        std::vector<PerturbedState> st;
        for (int i = 0; i < 3; ++i) {
            Bispinor v;
            for (int k = 0; k < 4; ++k) v(k) = cplx(r.uniform(-1, 1), r.uniform(-1, 1));
            st.push_back({0.3 * v, i == 0 ? Energy::positive : Energy::negative});
        }
        const PerturbedDiagonal p = perturbed_diagonal(d, st);
        Eigen::ComplexEigenSolver<SpinMatrix> es(p.matrix);
        for (int i = 0; i < 4; ++i) {
            const cplx z = es.eigenvalues()(i);
            const double dist = std::min(std::abs(z - d.lambda_plus), std::abs(z - d.lambda_minus));
            CHECK(dist <= p.delta_norm * (1 + 1e-12));
        }
    }
}

TEST_CASE("operator norm is the largest singular value") {
    Eigen::MatrixXcd A(2, 2);
    A << 3, 0, 0, cplx(0, -4);
    CHECK(operator_norm(A) == doctest::Approx(4.0));
}
