#pragma once

// Vector-valued adaptive Gauss-Kronrod integration on a prescribed partition,
// plus the spherical Bessel helpers used by the radial reductions.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cfslab/dirac.hpp"

namespace cfslab {

struct QuadOptions {
    double rel_tol = 1e-11;
    double abs_tol = 0.0;
    int max_intervals = 200000;
};

struct QuadReport {
    long evaluations = 0;
    int intervals = 0;
    double error = 0.0;
    double l1 = 0.0;  // integral of the componentwise modulus
    bool converged = true;
};

template <int N>
using CVec = Eigen::Matrix<cplx, N, 1>;

namespace detail {

template <int N>
struct Panel {
    double a, b;
    CVec<N> value;
    double err;
    double l1;
    bool operator<(const Panel& o) const { return err < o.err; }
};

template <int N, class F>
Panel<N> gk21(const F& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    CVec<N> fk = f(c);
    CVec<N> kr = fk * wk[0];
    CVec<N> gr = CVec<N>::Zero();
    double l1 = fk.cwiseAbs().sum() * wk[0];
    for (std::size_t i = 1; i < xk.size(); ++i) {
        CVec<N> fp = f(c + h * xk[i]);
        CVec<N> fm = f(c - h * xk[i]);
        kr += (fp + fm) * wk[i];
        l1 += (fp.cwiseAbs().sum() + fm.cwiseAbs().sum()) * wk[i];
        if (i & 1) gr += (fp + fm) * wg[i / 2];
    }
    Panel<N> p;
    p.a = a;
    p.b = b;
    p.value = kr * h;
    p.err = ((kr - gr) * h).cwiseAbs().sum();
    p.l1 = l1 * std::abs(h);
    return p;
}

}  // namespace detail

// Global adaptive integration over the union of [nodes[i], nodes[i+1]].
template <int N, class F>
CVec<N> integrate_adaptive(const F& f, const std::vector<double>& nodes, const QuadOptions& opt,
                           QuadReport* rep = nullptr) {
    std::priority_queue<detail::Panel<N>> heap;
    CVec<N> total = CVec<N>::Zero();
    double err = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!(nodes[i + 1] > nodes[i])) continue;
        auto p = detail::gk21<N>(f, nodes[i], nodes[i + 1]);
        total += p.value;
        err += p.err;
        l1 += p.l1;
        heap.push(p);
    }
    long evals = 21L * static_cast<long>(heap.size());
    const double eps = std::numeric_limits<double>::epsilon();
    auto target = [&] {
        return std::max({opt.abs_tol, opt.rel_tol * total.cwiseAbs().sum(), 50.0 * eps * l1});
    };
    bool ok = true;
    while (!heap.empty() && err > target()) {
        if (static_cast<int>(heap.size()) >= opt.max_intervals) {
            ok = false;
            break;
        }
        auto p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            ok = false;
            heap.push(p);
            break;
        }
        auto l = detail::gk21<N>(f, p.a, mid);
        auto r = detail::gk21<N>(f, mid, p.b);
        evals += 42;
        total += l.value + r.value - p.value;
        err += l.err + r.err - p.err;
        l1 += l.l1 + r.l1 - p.l1;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum to avoid drift from the running updates.
    total.setZero();
    err = 0.0;
    l1 = 0.0;
    int count = 0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().err;
        l1 += heap.top().l1;
        heap.pop();
        ++count;
    }
    if (rep) {
        rep->evaluations += evals;
        rep->intervals += count;
        rep->error += err;
        rep->l1 += l1;
        rep->converged = rep->converged && ok &&
                         err <= std::max({opt.abs_tol, opt.rel_tol * total.cwiseAbs().sum(), 50.0 * eps * l1}) * 1.0000001;
    }
    return total;
}

// Partition [a,b] into panels no wider than h, honouring the extra breakpoints.
std::vector<double> panel_nodes(double a, double b, double h, const std::vector<double>& extra = {});

// Smallest radius R >= start beyond which envelope(k) stays below rel * its peak on [0,R].
// The envelope is assumed to decay monotonically past its maximum.
double truncation_radius(const std::function<double(double)>& envelope, double start, double rel = 1e-16);

struct SphBessel {
    double j0, j1, j2, j1_over_x;
};
SphBessel sph_bessel_set(double x);

double sph_j0(double x);
double sph_j1(double x);
double sph_j2(double x);
double sph_j1_over_x(double x);  // j1(x)/x, finite at 0

struct RadialProblem {
    // Weights w_i(k) for the kernels (j0, k j1, k^2 j1(kr)/(kr), k^2 j2) against 4 pi k^2 dk.
    std::function<std::array<cplx, 4>(double)> weights;
    double upper = 0.0;
    std::vector<double> breaks;
    double scale = 1.0;
    double mass = 1.0;
};

// 4 pi int_0^upper k^2 w_i(k) K_i(k r) exp(-i s omega(k) tau) dk for the kernels
// K = (j0, k j1, k^2 j1(kr)/(kr), k^2 j2).  Panels resolve the oscillation in r and tau.
CVec<4> radial_moments(const RadialProblem& P, int s, double tau, double r, const QuadOptions& opt);

}  // namespace cfslab
