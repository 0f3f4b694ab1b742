#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cfslab {

using cplx = std::complex<double>;
using Bispinor = Eigen::Vector4cd;
using SpinMatrix = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;

// Natural units: momenta in units of m, lengths and times in 1/m.
struct SpacetimePoint {
    double t = 0.0;
    Vec3 x = Vec3::Zero();

    SpacetimePoint() = default;
    SpacetimePoint(double t_, const Vec3& x_) : t(t_), x(x_) {}
    SpacetimePoint(double t_, double x1, double x2, double x3) : t(t_), x(x1, x2, x3) {}

    SpacetimePoint operator+(const SpacetimePoint& o) const { return {t + o.t, x + o.x}; }
    SpacetimePoint operator-(const SpacetimePoint& o) const { return {t - o.t, x - o.x}; }
    SpacetimePoint operator-() const { return {-t, -x}; }
};

enum class Energy : int { negative = -1, positive = +1 };
enum class Spin : int { up = 0, down = 1 };

inline int sign_of(Energy e) { return static_cast<int>(e); }

double omega(const Vec3& k, double m);
double omega(double kabs, double m);

// Dirac representation, signature (+,-,-,-).
const SpinMatrix& gamma(int mu);
const SpinMatrix& pauli(int j);  // 2x2 embedded in the upper-left block; j = 1,2,3

SpinMatrix hamiltonian_symbol(const Vec3& k, double m);
SpinMatrix energy_projector(const Vec3& k, Energy sign, double m);
Bispinor fundamental_spinor(const Vec3& k, Energy sign, Spin spin, double m);

// conj(a) b := a^dagger gamma^0 b
cplx spin_product(const Bispinor& a, const Bispinor& b);

// slashed(k) = gamma^0 k0 - sum_i gamma^i k^i
SpinMatrix slashed(double k0, const Vec3& k);

// Unit vectors e_0..e_3 of C^4.
Bispinor unit_spinor(int mu);

}  // namespace cfslab
