#pragma once

// Independent reference values for the tests: brute force direct quadrature in
// three momentum dimensions, with none of the radial reductions of the library.

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cfslab/dirac.hpp"
#include "cfslab/packets.hpp"

namespace oracle {

using cfslab::Bispinor;
using cfslab::cplx;
using cfslab::SpinMatrix;
using cfslab::Vec3;

inline constexpr double pi = std::numbers::pi;

struct Rule {
    std::vector<double> x, w;
};

// n-point Gauss-Legendre on [a, b].
inline Rule legendre(int n, double a, double b) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
    Rule r;
    for (int i = 0; i < n; ++i) {
        double xi, wi;
        gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &xi, &wi, t);
        r.x.push_back(xi);
        r.w.push_back(wi);
    }
    gsl_integration_glfixed_table_free(t);
    return r;
}

// Composite rule on [0, K]: `panels` equal panels with n points each.
inline Rule composite(int panels, int n, double K) {
    Rule r;
    for (int p = 0; p < panels; ++p) {
        const Rule q = legendre(n, K * p / panels, K * (p + 1) / panels);
        r.x.insert(r.x.end(), q.x.begin(), q.x.end());
        r.w.insert(r.w.end(), q.w.begin(), q.w.end());
    }
    return r;
}

// Spherical tensor quadrature of f(k) over |k| <= K.  f returns a matrix-like type supporting += and *.
template <class T, class F>
T sphere(const F& f, double K, int panels, int nr, int nt, int np, T zero) {
    const Rule kr = composite(panels, nr, K);
    const Rule th = legendre(nt, -1.0, 1.0);  // cos theta
    T acc = zero;
    for (std::size_t a = 0; a < kr.x.size(); ++a) {
        const double k = kr.x[a];
        for (std::size_t b = 0; b < th.x.size(); ++b) {
            const double c = th.x[b], s = std::sqrt(std::max(0.0, 1.0 - c * c));
            for (int j = 0; j < np; ++j) {
                const double ph = 2.0 * pi * (j + 0.5) / np;
                const Vec3 kv(k * s * std::cos(ph), k * s * std::sin(ph), k * c);
                acc += f(kv) * (kr.w[a] * th.w[b] * (2.0 * pi / np) * k * k);
            }
        }
    }
    return acc;
}

// +-int d^3k/(2pi)^4 g^power p+-(k) gamma^0 exp(-i(+-omega xi0 - k.xi)), straight from the definition.
template <class G>
SpinMatrix kernel(const cfslab::SpacetimePoint& xi, const G& g, int power, cfslab::Energy sign, double m, double K,
                  int panels = 24, int nr = 16, int nt = 96, int np = 96) {
    const int s = cfslab::sign_of(sign);
    auto f = [&](const Vec3& k) -> SpinMatrix {
        const double w = std::sqrt(k.squaredNorm() + m * m);
        const double gk = std::pow(g(k.norm()), power);
        const cplx ph = std::exp(cplx(0.0, -(s * w * xi.t - k.dot(xi.x))));
        return (cfslab::energy_projector(k, sign, m) * cfslab::gamma(0)) * (gk * ph);
    };
    return sphere<SpinMatrix>(f, K, panels, nr, nt, np, SpinMatrix::Zero()) * (s / std::pow(2.0 * pi, 4));
}

// (2pi)^{-3/2} int d^3k lambda(k) chi(k) exp(-i(s omega t - k.x)) over |k| <= K.
inline Bispinor packet(const cfslab::WavePacket& u, const cfslab::SpacetimePoint& x, double K, int panels = 16,
                       int nr = 16, int nt = 64, int np = 64) {
    const int s = cfslab::sign_of(u.sign);
    auto f = [&](const Vec3& k) -> Bispinor {
        const double w = std::sqrt(k.squaredNorm() + u.mass * u.mass);
        const cplx ph = std::exp(cplx(0.0, -(s * w * x.t - k.dot(x.x))));
        return cfslab::fundamental_spinor(k, u.sign, u.spin, u.mass) * (u.lambda(k) * ph);
    };
    return sphere<Bispinor>(f, K, panels, nr, nt, np, Bispinor::Zero()) / std::pow(2.0 * pi, 1.5);
}

// Leibniz expansion of a small determinant.
inline cplx leibniz_det(const Eigen::MatrixXcd& A) {
    const int n = static_cast<int>(A.rows());
    if (n == 0) return 1.0;
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    cplx sum = 0.0;
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) inv += p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(j)];
        cplx term = (inv % 2) ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) term *= A(i, p[static_cast<std::size_t>(i)]);
        sum += term;
    } while (std::next_permutation(p.begin(), p.end()));
    return sum;
}

}  // namespace oracle
