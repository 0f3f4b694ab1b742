#include "cfslab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cfslab/errors.hpp"

namespace cfslab {

std::vector<double> panel_nodes(double a, double b, double h, const std::vector<double>& extra) {
    if (!(b > a)) return {a, b};
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("panel width must be positive");
    std::vector<double> cuts{a, b};
    for (double e : extra)
        if (e > a && e < b) cuts.push_back(e);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        if (!(hi > lo)) continue;
        const long n = std::max(1L, static_cast<long>(std::ceil((hi - lo) / h)));
        if (n > 5000000) throw NumericalFailure("oscillatory partition too fine");
        for (long j = 0; j < n; ++j) out.push_back(lo + (hi - lo) * static_cast<double>(j) / n);
    }
    out.push_back(b);
    return out;
}

double truncation_radius(const std::function<double(double)>& envelope, double start, double rel) {
    double r = std::max(start, 1e-8);
    double peak = 0.0;
    for (int i = 0; i <= 400; ++i) peak = std::max(peak, envelope(r * i / 400.0));
    for (int guard = 0; guard < 200; ++guard) {
        double mx = 0.0;
        for (int i = 0; i <= 64; ++i) mx = std::max(mx, envelope(r * (1.0 + i / 64.0)));
        peak = std::max(peak, mx);
        if (!(peak > 0.0) || mx <= rel * peak) return r;
        r *= 2.0;
    }
    throw NumericalFailure("profile does not decay; cannot truncate tail");
}

namespace {

// x^l sum_n (-x^2/2)^n / (n! (2l+2n+1)!!), accurate to rounding for |x| < 1.
double sph_series(int l, double x) {
    double df = 1.0;
    for (int i = 3; i <= 2 * l + 1; i += 2) df *= i;
    double term = 1.0 / df, sum = term;
    const double y = -0.5 * x * x;
    for (int n = 1; n < 12; ++n) {
        term *= y / (n * (2.0 * l + 2.0 * n + 1.0));
        sum += term;
    }
    return std::pow(x, l) * sum;
}

}  // namespace

SphBessel sph_bessel_set(double x) {
    SphBessel b;
    if (std::abs(x) < 1.0) {
        b.j0 = sph_series(0, x);
        // j1(x)/x as a series in x^2
        double term = 1.0 / 3.0, sum = term;
        const double y = -0.5 * x * x;
        for (int n = 1; n < 12; ++n) {
            term *= y / (n * (2.0 * n + 3.0));
            sum += term;
        }
        b.j1_over_x = sum;
        b.j1 = x * sum;
        b.j2 = sph_series(2, x);
        return b;
    }
    const double s = std::sin(x), c = std::cos(x), ix = 1.0 / x;
    b.j0 = s * ix;
    b.j1 = (s * ix - c) * ix;
    b.j1_over_x = b.j1 * ix;
    b.j2 = (3.0 * ix * ix - 1.0) * s * ix - 3.0 * c * ix * ix;
    return b;
}

constexpr double pi = std::numbers::pi;

CVec<4> radial_moments(const RadialProblem& P, int s, double tau, double r, const QuadOptions& opt) {
    if (P.upper <= 0.0) return CVec<4>::Zero();
    const double osc = r + std::abs(tau);
    double h = P.scale / 2.0;
    if (osc > 0.0) h = std::min(h, pi / osc);
    auto nodes = panel_nodes(0.0, P.upper, h, P.breaks);
    auto f = [&](double k) {
        const auto w = P.weights(k);
        const SphBessel b = sph_bessel_set(k * r);
        const cplx ph = std::polar(4.0 * pi * k * k, -s * omega(k, P.mass) * tau);
        CVec<4> v;
        v << w[0] * b.j0, w[1] * k * b.j1, w[2] * k * k * b.j1_over_x, w[3] * k * k * b.j2;
        return CVec<4>(v * ph);
    };
    QuadReport rep;
    CVec<4> res = integrate_adaptive<4>(f, nodes, opt, &rep);
    if (!rep.converged)
        throw NumericalFailure("radial quadrature did not converge: " + std::to_string(rep.intervals) +
                               " intervals, error " + std::to_string(rep.error) + " at r=" + std::to_string(r) +
                               ", tau=" + std::to_string(tau));
    return res;
}


double sph_j1(double x) { return sph_bessel_set(x).j1; }
double sph_j2(double x) { return sph_bessel_set(x).j2; }
double sph_j1_over_x(double x) { return sph_bessel_set(x).j1_over_x; }

}  // namespace cfslab
