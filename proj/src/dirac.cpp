#include "cfslab/dirac.hpp"

#include <array>
#include <cmath>
#include <string>

#include "cfslab/errors.hpp"

namespace cfslab {

namespace {

void require_mass(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("mass must be positive and finite");
}

void require_finite(const Vec3& k) {
    if (!k.allFinite()) throw InvalidArgument("momentum has non-finite components");
}

struct Tables {
    std::array<SpinMatrix, 4> g;
    std::array<SpinMatrix, 4> s;

    Tables() {
        const cplx I(0.0, 1.0);
        Eigen::Matrix2cd sig[3];
        sig[0] << 0, 1, 1, 0;
        sig[1] << 0, -I, I, 0;
        sig[2] << 1, 0, 0, -1;

        g[0].setZero();
        g[0].diagonal() << 1, 1, -1, -1;
        s[0].setIdentity();
        for (int j = 0; j < 3; ++j) {
            g[j + 1].setZero();
            g[j + 1].block<2, 2>(0, 2) = sig[j];
            g[j + 1].block<2, 2>(2, 0) = -sig[j];
            s[j + 1].setZero();
            s[j + 1].block<2, 2>(0, 0) = sig[j];
        }
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

}  // namespace

double omega(const Vec3& k, double m) {
    require_mass(m);
    require_finite(k);
    return std::sqrt(k.squaredNorm() + m * m);
}

double omega(double kabs, double m) { return std::sqrt(kabs * kabs + m * m); }

const SpinMatrix& gamma(int mu) {
    if (mu < 0 || mu > 3) throw InvalidArgument("gamma index out of range: " + std::to_string(mu));
    return tables().g[mu];
}

const SpinMatrix& pauli(int j) {
    if (j < 1 || j > 3) throw InvalidArgument("pauli index out of range: " + std::to_string(j));
    return tables().s[j];
}

SpinMatrix hamiltonian_symbol(const Vec3& k, double m) {
    require_mass(m);
    require_finite(k);
    const auto& g = tables().g;
    SpinMatrix kg = k(0) * g[1] + k(1) * g[2] + k(2) * g[3];
    return g[0] * kg + m * g[0];
}

SpinMatrix energy_projector(const Vec3& k, Energy sign, double m) {
    const double w = omega(k, m);
    const double s = sign_of(sign);
    const auto& g = tables().g;
    SpinMatrix kg = k(0) * g[1] + k(1) * g[2] + k(2) * g[3];
    SpinMatrix p = SpinMatrix::Identity() - s * (kg * g[0]) / w + s * (m / w) * g[0];
    return 0.5 * p;
}

Bispinor fundamental_spinor(const Vec3& k, Energy sign, Spin spin, double m) {
    const double w = omega(k, m);
    // (sigma.k) e_s
    Eigen::Vector2cd sk;
    if (spin == Spin::up)
        sk << k(2), cplx(k(0), k(1));
    else
        sk << cplx(k(0), -k(1)), -k(2);
    sk /= (w + m);
    Eigen::Vector2cd e = spin == Spin::up ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
    Bispinor out;
    if (sign == Energy::positive)
        out << e, sk;
    else
        out << -sk, e;
    return out;
}

cplx spin_product(const Bispinor& a, const Bispinor& b) {
    return std::conj(a(0)) * b(0) + std::conj(a(1)) * b(1) - std::conj(a(2)) * b(2) -
           std::conj(a(3)) * b(3);
}

SpinMatrix slashed(double k0, const Vec3& k) {
    const auto& g = tables().g;
    return k0 * g[0] - (k(0) * g[1] + k(1) * g[2] + k(2) * g[3]);
}

Bispinor unit_spinor(int mu) {
    if (mu < 0 || mu > 3) throw InvalidArgument("spinor index out of range");
    Bispinor e = Bispinor::Zero();
    e(mu) = 1.0;
    return e;
}

}  // namespace cfslab
