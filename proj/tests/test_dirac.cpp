#include "doctest.h"

#include "cfslab/dirac.hpp"
#include "cfslab/experiments.hpp"

using namespace cfslab;

namespace {

Vec3 random_k(Rng& r, double scale) {
    return Vec3(r.uniform(-scale, scale), r.uniform(-scale, scale), r.uniform(-scale, scale));
}

double max_abs(const SpinMatrix& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("gamma matrices satisfy the Clifford relations") {
    const double eta[4] = {1, -1, -1, -1};
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
            const SpinMatrix ac = gamma(mu) * gamma(nu) + gamma(nu) * gamma(mu);
            const SpinMatrix want = (mu == nu ? 2.0 * eta[mu] : 0.0) * SpinMatrix::Identity();
            CHECK(max_abs(ac - want) == 0.0);
        }
    CHECK(max_abs(gamma(0).adjoint() - gamma(0)) == 0.0);
    for (int j = 1; j <= 3; ++j) CHECK(max_abs(gamma(j).adjoint() + gamma(j)) == 0.0);
}

TEST_CASE("energy projectors are complementary orthogonal projections") {
    Rng r(3);
    for (int i = 0; i < 200; ++i) {
        const double m = r.uniform(0.1, 3.0);
        const Vec3 k = random_k(r, 50.0);
        const SpinMatrix pp = energy_projector(k, Energy::positive, m);
        const SpinMatrix pm = energy_projector(k, Energy::negative, m);
        CHECK(max_abs(pp - pp.adjoint()) <= 1e-12);
        CHECK(max_abs(pm * pm - pm) <= 1e-12);
        CHECK(max_abs(pp * pm) <= 1e-12);
        CHECK(max_abs(pp + pm - SpinMatrix::Identity()) <= 1e-12);
        CHECK(std::abs(pp.trace().real() - 2.0) <= 1e-12);
    }
}

TEST_CASE("the Hamiltonian squares to omega^2") {
    Rng r(5);
    for (int i = 0; i < 100; ++i) {
        const double m = r.uniform(0.1, 3.0);
        const Vec3 k = random_k(r, 10.0);
        const SpinMatrix h = hamiltonian_symbol(k, m);
        const double w = omega(k, m);
        CHECK(max_abs(h * h - w * w * SpinMatrix::Identity()) <= 1e-12 * w * w);
    }
}

TEST_CASE("fundamental spinors are eigenvectors of h with eigenvalue +-omega") {
    Rng r(7);
    for (int i = 0; i < 100; ++i) {
        const double m = r.uniform(0.1, 3.0);
        const Vec3 k = random_k(r, 20.0);
        const double w = omega(k, m);
        for (Energy e : {Energy::positive, Energy::negative})
            for (Spin s : {Spin::up, Spin::down}) {
                const Bispinor chi = fundamental_spinor(k, e, s, m);
                REQUIRE(chi.norm() > 0.0);
                const Bispinor res = hamiltonian_symbol(k, m) * chi - sign_of(e) * w * chi;
                CHECK(res.norm() <= 1e-12 * w * chi.norm());
            }
    }
}

TEST_CASE("spinors of opposite energy are orthogonal in C^4") {
    const Vec3 k(0.3, -1.2, 0.7);
    const Bispinor a = fundamental_spinor(k, Energy::positive, Spin::up, 1.0);
    const Bispinor b = fundamental_spinor(k, Energy::negative, Spin::down, 1.0);
    const Bispinor c = fundamental_spinor(k, Energy::negative, Spin::up, 1.0);
    CHECK(std::abs(a.dot(b)) <= 1e-14 * a.norm() * b.norm());
    CHECK(std::abs(a.dot(c)) <= 1e-14 * a.norm() * c.norm());
    CHECK(std::abs(b.dot(c)) <= 1e-14 * b.norm() * c.norm());
}

TEST_CASE("spin product is conj(a)^T gamma0 b") {
    const Bispinor a = unit_spinor(0) + cplx(0, 1) * unit_spinor(2);
    const Bispinor b = unit_spinor(2);
    CHECK(std::abs(spin_product(a, unit_spinor(3))) == 0.0);
    CHECK(std::abs(spin_product(a, b) - cplx(0, 1)) <= 1e-15);
    CHECK(std::abs(spin_product(a, b) - (a.adjoint() * gamma(0) * b)(0)) == 0.0);
    CHECK(spin_product(unit_spinor(0), unit_spinor(0)).real() == doctest::Approx(1.0));
    CHECK(spin_product(unit_spinor(3), unit_spinor(3)).real() == doctest::Approx(-1.0));
}

TEST_CASE("omega at rest equals the mass") {
    CHECK(omega(Vec3::Zero(), 2.5) == 2.5);
    CHECK(omega(3.0, 4.0) == doctest::Approx(5.0));
}
